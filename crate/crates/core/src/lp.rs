//! Exact two-phase simplex over the rationals.
//!
//! Problems are in standard form `A v = b, v >= 0`. Pivoting follows Bland's
//! rule, so the solver terminates on degenerate problems. Infeasibility is
//! reported with a Farkas certificate that callers can check independently.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rat::Rat;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Feasibility {
    /// A point with `A v = b` and `v >= 0`.
    Feasible(Vec<Rat>),
    /// A vector `c` with `cᵀA >= 0` componentwise and `cᵀb < 0`.
    Infeasible(Vec<Rat>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Optimum {
    Optimal { value: Rat, point: Vec<Rat> },
    Infeasible(Vec<Rat>),
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Rat>>,
    obj: Vec<Rat>,
    basis: Vec<usize>,
    width: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v /= &p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pr) in row.iter_mut().zip(&pivot_row) {
                if !pr.is_zero() {
                    *v -= &f * pr;
                }
            }
        }
        if !self.obj[c].is_zero() {
            let f = self.obj[c].clone();
            for (v, pr) in self.obj.iter_mut().zip(&pivot_row) {
                if !pr.is_zero() {
                    *v -= &f * pr;
                }
            }
        }
        self.basis[r] = c;
    }

    fn run(&mut self, allowed: impl Fn(usize) -> bool) -> Outcome {
        let rhs = self.width;
        loop {
            let entering = (0..self.width).find(|&j| allowed(j) && self.obj[j].is_negative());
            let Some(c) = entering else {
                return Outcome::Optimal;
            };
            let mut best: Option<(usize, Rat)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[c].is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / &row[c];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return Outcome::Unbounded,
            }
        }
    }

    fn point(&self, n: usize) -> Vec<Rat> {
        let mut v = vec![Rat::zero(); n];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < n {
                v[b] = self.rows[i][self.width].clone();
            }
        }
        v
    }
}

fn check_dims(a: &[Vec<Rat>], b: &[Rat]) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} constraint rows but {} right-hand sides",
            a.len(),
            b.len()
        )));
    }
    let n = a.first().map_or(0, Vec::len);
    if a.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch("ragged constraint matrix".into()));
    }
    Ok(n)
}

/// Runs phase one. Returns the tableau positioned at a feasible basis with
/// artificial columns `n..n+m`, or the Farkas certificate.
fn phase_one(a: &[Vec<Rat>], b: &[Rat], n: usize) -> std::result::Result<Tableau, Vec<Rat>> {
    let m = a.len();
    let width = n + m;
    let signs: Vec<bool> = b.iter().map(|v| v.is_negative()).collect();
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = Vec::with_capacity(width + 1);
        for v in &a[i] {
            row.push(if signs[i] { -v } else { v.clone() });
        }
        for k in 0..m {
            row.push(if k == i { Rat::one() } else { Rat::zero() });
        }
        row.push(if signs[i] { -&b[i] } else { b[i].clone() });
        rows.push(row);
    }
    let mut obj = vec![Rat::zero(); width + 1];
    for row in &rows {
        for j in 0..n {
            obj[j] -= &row[j];
        }
        obj[width] -= &row[width];
    }
    let mut t = Tableau {
        rows,
        obj,
        basis: (n..width).collect(),
        width,
    };
    // Phase one is bounded below by zero.
    let _ = t.run(|_| true);
    let value = -t.obj[width].clone();
    if value.is_positive() {
        // Dual of phase one: y_k = 1 - reduced cost of artificial k.
        let cert: Vec<Rat> = (0..m)
            .map(|k| {
                let y = Rat::one() - &t.obj[n + k];
                if signs[k] {
                    y
                } else {
                    -y
                }
            })
            .collect();
        return Err(cert);
    }
    // Drive remaining zero-level artificials out where possible.
    for i in 0..m {
        if t.basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| !t.rows[i][j].is_zero()) {
                t.pivot(i, j);
            }
        }
    }
    Ok(t)
}

/// Checks a Farkas certificate in exact arithmetic.
pub fn verify_certificate(a: &[Vec<Rat>], b: &[Rat], c: &[Rat]) -> bool {
    if c.len() != a.len() {
        return false;
    }
    let n = a.first().map_or(0, Vec::len);
    let cols_ok = (0..n).all(|j| {
        let s: Rat = a.iter().zip(c).map(|(row, ci)| &row[j] * ci).sum();
        !s.is_negative()
    });
    let rhs: Rat = b.iter().zip(c).map(|(bi, ci)| bi * ci).sum();
    cols_ok && rhs.is_negative()
}

/// Decides `A v = b, v >= 0`.
pub fn feasible(a: &[Vec<Rat>], b: &[Rat]) -> Result<Feasibility> {
    let n = check_dims(a, b)?;
    match phase_one(a, b, n) {
        Ok(t) => Ok(Feasibility::Feasible(t.point(n))),
        Err(cert) => {
            debug_assert!(verify_certificate(a, b, &cert));
            Ok(Feasibility::Infeasible(cert))
        }
    }
}

/// Minimises `cᵀv` subject to `A v = b, v >= 0`.
pub fn minimize(cost: &[Rat], a: &[Vec<Rat>], b: &[Rat]) -> Result<Optimum> {
    let n = check_dims(a, b)?;
    if cost.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} costs for {n} variables",
            cost.len()
        )));
    }
    let mut t = match phase_one(a, b, n) {
        Ok(t) => t,
        Err(cert) => return Ok(Optimum::Infeasible(cert)),
    };
    let width = t.width;
    let mut obj = vec![Rat::zero(); width + 1];
    obj[..n].clone_from_slice(cost);
    for (i, &bi) in t.basis.iter().enumerate() {
        if bi < n && !cost[bi].is_zero() {
            let cb = cost[bi].clone();
            for (o, v) in obj.iter_mut().zip(&t.rows[i]) {
                *o -= &cb * v;
            }
        }
    }
    t.obj = obj;
    match t.run(|j| j < n) {
        Outcome::Unbounded => Ok(Optimum::Unbounded),
        Outcome::Optimal => Ok(Optimum::Optimal {
            value: -t.obj[width].clone(),
            point: t.point(n),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, rat};

    fn residual_ok(a: &[Vec<Rat>], b: &[Rat], v: &[Rat]) -> bool {
        v.iter().all(|x| !x.is_negative())
            && a.iter().zip(b).all(|(row, bi)| {
                let s: Rat = row.iter().zip(v).map(|(p, q)| p * q).sum();
                s == *bi
            })
    }

    #[test]
    fn single_variable_cases() {
        let a = vec![vec![int(1)]];
        assert_eq!(feasible(&a, &[int(1)]).unwrap(), Feasibility::Feasible(vec![int(1)]));
        match feasible(&a, &[int(-1)]).unwrap() {
            Feasibility::Infeasible(c) => assert!(verify_certificate(&a, &[int(-1)], &c)),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn small_system_feasible_point_is_exact() {
        let a = vec![vec![int(1), int(1), int(0)], vec![int(0), int(1), int(1)]];
        let b = vec![rat(1, 2), rat(2, 3)];
        match feasible(&a, &b).unwrap() {
            Feasibility::Feasible(v) => assert!(residual_ok(&a, &b, &v)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn contradictory_rows_give_certificate() {
        // x + y = 1 and x + y = 2
        let a = vec![vec![int(1), int(1)], vec![int(1), int(1)]];
        let b = vec![int(1), int(2)];
        match feasible(&a, &b).unwrap() {
            Feasibility::Infeasible(c) => assert!(verify_certificate(&a, &b, &c)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let a = vec![vec![int(1), int(1)], vec![int(2), int(2)]];
        let b = vec![int(1), int(2)];
        assert!(matches!(feasible(&a, &b).unwrap(), Feasibility::Feasible(_)));
        let opt = minimize(&[int(3), int(1)], &a, &b).unwrap();
        assert_eq!(
            opt,
            Optimum::Optimal {
                value: int(1),
                point: vec![int(0), int(1)]
            }
        );
    }

    #[test]
    fn minimisation_and_unboundedness() {
        // min -x subject to x - y = 0
        let a = vec![vec![int(1), int(-1)]];
        assert_eq!(minimize(&[int(-1), int(0)], &a, &[int(0)]).unwrap(), Optimum::Unbounded);
        // transport 2x2 with costs
        let a = vec![
            vec![int(1), int(1), int(0), int(0)],
            vec![int(0), int(0), int(1), int(1)],
            vec![int(1), int(0), int(1), int(0)],
        ];
        let b = vec![rat(1, 2), rat(1, 2), rat(1, 4)];
        let c = vec![int(0), int(1), int(1), int(0)];
        match minimize(&c, &a, &b).unwrap() {
            Optimum::Optimal { value, point } => {
                assert_eq!(value, rat(1, 4));
                assert!(residual_ok(&a, &b, &point));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dimension_errors() {
        assert!(feasible(&[vec![int(1)]], &[]).is_err());
        assert!(minimize(&[int(1), int(2)], &[vec![int(1)]], &[int(1)]).is_err());
    }
}
