//! Loss functions, uncertainty measures and the `wp` transformer.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::dist::{check_space, Dist, Hyper, Space};
use crate::error::{Error, Result};
use crate::random::{self, TrialRng};
use crate::rat::{to_f64, Rat};
use crate::semantics::{AbstractHmm, MATERIALIZE_BOUND};

/// Strategy-indexed cost table `ℓ[i][x] >= 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LossFunction {
    space: Space,
    labels: Vec<String>,
    table: Vec<Vec<Rat>>,
}

impl LossFunction {
    pub fn new(space: Space, labels: Vec<String>, table: Vec<Vec<Rat>>) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::InvalidLoss("no strategies".into()));
        }
        if labels.len() != table.len() {
            return Err(Error::InvalidLoss(format!(
                "{} labels for {} rows",
                labels.len(),
                table.len()
            )));
        }
        for (label, row) in labels.iter().zip(&table) {
            if row.len() != space.len() {
                return Err(Error::InvalidLoss(format!(
                    "row `{label}` has {} entries, expected {}",
                    row.len(),
                    space.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| v.is_negative()) {
                return Err(Error::InvalidLoss(format!("negative entry {v} in row `{label}`")));
            }
        }
        Ok(LossFunction { space, labels, table })
    }

    /// Guess the state; lose 1 when wrong. Its measure is `1 - max ρ`.
    pub fn bayes_risk(space: Space) -> Self {
        let n = space.len();
        let labels = space.labels().to_vec();
        let table = (0..n)
            .map(|w| (0..n).map(|x| if w == x { Rat::zero() } else { Rat::one() }).collect())
            .collect();
        LossFunction { space, labels, table }
    }

    /// A single all-ones strategy, whose measure is constantly 1.
    pub fn one(space: Space) -> Self {
        let table = vec![vec![Rat::one(); space.len()]];
        LossFunction {
            space,
            labels: vec!["one".into()],
            table,
        }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn table(&self) -> &[Vec<Rat>] {
        &self.table
    }

    /// `U_ℓ(ρ) = min_i Σ_x ρ[x] ℓ[i][x]`.
    pub fn eval(&self, rho: &Dist) -> Result<Rat> {
        check_space(&self.space, rho.space(), "loss function")?;
        Ok(self.eval_unchecked(rho))
    }

    fn eval_unchecked(&self, rho: &Dist) -> Rat {
        self.table
            .iter()
            .map(|row| rho.expect(|x| row[x].clone()))
            .min()
            .expect("at least one strategy")
    }

    /// `E_Δ U_ℓ`.
    pub fn expect_hyper(&self, h: &Hyper) -> Result<Rat> {
        check_space(&self.space, h.space(), "loss function")?;
        Ok(h.expect(|d| self.eval_unchecked(d)))
    }

    /// Loss function of `a·U_ℓ1 + b·U_ℓ2`: pairs of strategies, summed costs.
    pub fn combine(a: &Rat, l1: &LossFunction, b: &Rat, l2: &LossFunction) -> Result<Self> {
        check_space(&l1.space, &l2.space, "loss combination")?;
        let mut labels = Vec::new();
        let mut table = Vec::new();
        for (i, r1) in l1.table.iter().enumerate() {
            for (j, r2) in l2.table.iter().enumerate() {
                labels.push(format!("{}+{}", l1.labels[i], l2.labels[j]));
                table.push(r1.iter().zip(r2).map(|(p, q)| a * p + b * q).collect());
            }
        }
        LossFunction::new(l1.space.clone(), labels, table)
    }

    /// `(π ▹ ℓ)[i][x] = ℓ[i][x] · π[x]`.
    pub fn skewed(&self, prior: &Dist) -> Result<Self> {
        check_space(&self.space, prior.space(), "skew")?;
        let table = self
            .table
            .iter()
            .map(|row| row.iter().enumerate().map(|(x, v)| v * prior.prob(x)).collect())
            .collect();
        Ok(LossFunction {
            space: self.space.clone(),
            labels: self.labels.clone(),
            table,
        })
    }

    /// Drops strategies that are pointwise no better than another one, and
    /// exact duplicates. The measure is unchanged.
    pub fn pruned(&self) -> Self {
        let keep = undominated(&self.table);
        LossFunction {
            space: self.space.clone(),
            labels: keep.iter().map(|&k| self.labels[k].clone()).collect(),
            table: keep.iter().map(|&k| self.table[k].clone()).collect(),
        }
    }
}

fn dominates(a: &[Rat], b: &[Rat]) -> bool {
    a.iter().zip(b).all(|(p, q)| p <= q)
}

/// Indices of rows not dominated by an earlier-kept or any other row.
fn undominated(rows: &[Vec<Rat>]) -> Vec<usize> {
    let mut keep: Vec<usize> = Vec::new();
    'outer: for (k, row) in rows.iter().enumerate() {
        for (j, other) in rows.iter().enumerate() {
            if j == k {
                continue;
            }
            // strictly better somewhere, or an identical earlier row
            if dominates(other, row) && (other != row || j < k) {
                continue 'outer;
            }
        }
        keep.push(k);
    }
    keep
}

/// `-Σ ρ log2 ρ`.
pub fn shannon(rho: &Dist) -> f64 {
    rho.iter()
        .map(|(_, p)| {
            let p = to_f64(p);
            -p * p.log2()
        })
        .sum()
}

/// `max_x ρ[x]`: the chance of guessing the state in one try.
pub fn bayes_vulnerability(rho: &Dist) -> Rat {
    rho.iter().map(|(_, p)| p.clone()).max().unwrap_or_else(Rat::zero)
}

/// Expected number of guesses when trying states in order of decreasing
/// probability.
pub fn guessing_entropy(rho: &Dist) -> Rat {
    let mut ps: Vec<Rat> = rho.iter().map(|(_, p)| p.clone()).collect();
    ps.sort_by(|a, b| b.cmp(a));
    ps.iter().enumerate().fold(Rat::zero(), |acc, (k, p)| {
        acc + p * Rat::from_integer((k as i64 + 1).into())
    })
}

/// A measured value: exact unless logarithms were involved.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Exact(Rat),
    Approx(f64),
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(r) => to_f64(r),
            Value::Approx(v) => *v,
        }
    }

    pub fn exact(&self) -> Option<&Rat> {
        match self {
            Value::Exact(r) => Some(r),
            Value::Approx(_) => None,
        }
    }

    fn sub(&self, other: &Value) -> Value {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a - b),
            _ => Value::Approx(self.to_f64() - other.to_f64()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(r) => write!(f, "{r}"),
            Value::Approx(v) => write!(f, "{v}"),
        }
    }
}

/// An uncertainty measure: higher means the attacker is worse off.
#[derive(Clone, Debug)]
pub enum UncertaintyMeasure {
    Loss(LossFunction),
    Shannon,
    /// `1 - max ρ`.
    BayesRisk,
    Guessing,
}

impl UncertaintyMeasure {
    pub fn eval(&self, rho: &Dist) -> Result<Value> {
        Ok(match self {
            UncertaintyMeasure::Loss(l) => Value::Exact(l.eval(rho)?),
            UncertaintyMeasure::Shannon => Value::Approx(shannon(rho)),
            UncertaintyMeasure::BayesRisk => Value::Exact(Rat::one() - bayes_vulnerability(rho)),
            UncertaintyMeasure::Guessing => Value::Exact(guessing_entropy(rho)),
        })
    }

    pub fn expect(&self, h: &Hyper) -> Result<Value> {
        match self {
            UncertaintyMeasure::Shannon => Ok(Value::Approx(h.expect_f64(shannon))),
            UncertaintyMeasure::Loss(l) => Ok(Value::Exact(l.expect_hyper(h)?)),
            _ => {
                let mut total = Rat::zero();
                for (d, w) in h.iter() {
                    match self.eval(d)? {
                        Value::Exact(v) => total += w * v,
                        Value::Approx(_) => unreachable!("only shannon is approximate"),
                    }
                }
                Ok(Value::Exact(total))
            }
        }
    }
}

/// `wp.h.u.π = E_{h.π} u`.
pub fn wp(h: &AbstractHmm, u: &UncertaintyMeasure, prior: &Dist) -> Result<Value> {
    u.expect(&h.eval(prior)?)
}

/// Exact `wp` for a loss function.
pub fn wp_exact(h: &AbstractHmm, l: &LossFunction, prior: &Dist) -> Result<Rat> {
    l.expect_hyper(&h.eval(prior)?)
}

/// The loss function whose measure is `wp.h.U_ℓ`. Strategies are maps from
/// observations to strategies of `ℓ`; dominated ones are pruned as the
/// table is built.
pub fn wp_loss(h: &AbstractHmm, l: &LossFunction) -> Result<LossFunction> {
    check_space(h.space(), l.space(), "wp")?;
    let t = h.materialize(MATERIALIZE_BOUND)?;
    let n = t.space().len();
    // (label, vector) pairs accumulated over observations
    let mut acc: Vec<(Vec<String>, Vec<Rat>)> = vec![(Vec::new(), vec![Rat::zero(); n])];
    for (y, obs) in t.obs().iter().enumerate() {
        let options: Vec<Vec<Rat>> = l
            .table
            .iter()
            .map(|row| {
                (0..n)
                    .map(|x| {
                        (0..n).fold(Rat::zero(), |s, x2| {
                            let hv = t.get(x, y, x2);
                            if hv.is_zero() {
                                s
                            } else {
                                s + hv * &row[x2]
                            }
                        })
                    })
                    .collect()
            })
            .collect();
        let keep = undominated(&options);
        let mut next = Vec::with_capacity(acc.len() * keep.len());
        for (labels, vec) in &acc {
            for &i in &keep {
                let mut lab = labels.clone();
                lab.push(format!("{obs}>{}", l.labels[i]));
                let sum: Vec<Rat> = vec.iter().zip(&options[i]).map(|(a, b)| a + b).collect();
                next.push((lab, sum));
            }
        }
        let rows: Vec<Vec<Rat>> = next.iter().map(|(_, v)| v.clone()).collect();
        acc = undominated(&rows).into_iter().map(|k| next[k].clone()).collect();
    }
    let (labels, table): (Vec<Vec<String>>, Vec<Vec<Rat>>) = acc.into_iter().unzip();
    LossFunction::new(
        l.space.clone(),
        labels.into_iter().map(|v| v.join(",")).collect(),
        table,
    )
}

/// Prior, posterior and their difference.
#[derive(Clone, Debug, PartialEq)]
pub struct Leakage {
    pub prior: Value,
    pub posterior: Value,
    /// `prior - posterior`: how much uncertainty the program removed.
    pub leak: Value,
}

pub fn leakage(h: &AbstractHmm, prior: &Dist, u: &UncertaintyMeasure) -> Result<Leakage> {
    let before = u.eval(prior)?;
    let after = wp(h, u, prior)?;
    Ok(Leakage {
        leak: before.sub(&after),
        prior: before,
        posterior: after,
    })
}

/// Failures found by a randomized law check.
#[derive(Clone, Debug, Default)]
pub struct TrialReport {
    pub trials: usize,
    pub failures: Vec<String>,
}

impl TrialReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks `wp(h1;h2) = wp h1 ∘ wp h2` at random losses and priors. The
/// right-hand side goes through [`wp_loss`] when `h2` can be materialized,
/// and through nested expectations otherwise.
pub fn transformer_compose_check(
    h1: &AbstractHmm,
    h2: &AbstractHmm,
    trials: usize,
    rng: &mut TrialRng,
) -> Result<TrialReport> {
    let space = h1.space().clone();
    let seq = h1.clone().then(h2.clone())?;
    let mut report = TrialReport {
        trials,
        failures: Vec::new(),
    };
    for t in 0..trials {
        let l = random::loss(rng, &space, 2);
        let prior = random::dist(rng, &space);
        let lhs = wp_exact(&seq, &l, &prior)?;
        let rhs = match wp_loss(h2, &l) {
            Ok(pre) => wp_exact(h1, &pre, &prior)?,
            Err(Error::NotMaterialized(_)) => {
                let mid = h1.eval(&prior)?;
                let mut total = Rat::zero();
                for (d, w) in mid.iter() {
                    total += w * wp_exact(h2, &l, d)?;
                }
                total
            }
            Err(e) => return Err(e),
        };
        if lhs != rhs {
            report.failures.push(format!("trial {t}: {lhs} vs {rhs} at {prior}"));
        }
    }
    Ok(report)
}

/// Checks `wp.h.U_{π1▹ℓ}.π2 = wp.h.U_{π2▹ℓ}.π1` on random triples.
pub fn is_multiplicative(h: &AbstractHmm, trials: usize, rng: &mut TrialRng) -> Result<TrialReport> {
    let space = h.space().clone();
    let mut report = TrialReport {
        trials,
        failures: Vec::new(),
    };
    for t in 0..trials {
        let p1 = random::full_dist(rng, &space);
        let p2 = random::full_dist(rng, &space);
        let l = random::loss(rng, &space, 3);
        let a = wp_exact(h, &l.skewed(&p1)?, &p2)?;
        let b = wp_exact(h, &l.skewed(&p2)?, &p1)?;
        if a != b {
            report.failures.push(format!("trial {t}: {a} vs {b} for {p1} and {p2}"));
        }
    }
    Ok(report)
}
