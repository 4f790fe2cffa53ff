//! The refinement order on hypers, decided by an exact LP.
//!
//! `ΔS ⊑ ΔI` holds when some row-stochastic `R` post-processes the columns
//! of `J_S` into those of `J_I`. When no `R` exists, the Farkas certificate
//! of the infeasible system is turned into a loss function on which `ΔI`
//! does strictly better for the attacker than `ΔS`.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::dist::{check_space, kantorovich_dist, Dist, Hyper, Space};
use crate::error::{Error, Result};
use crate::lp::{self, Feasibility, Optimum};
use crate::matrix::{mat_mul, JointMatrix, ObsLabel};
use crate::rat::Rat;
use crate::uncertainty::LossFunction;

/// One column per inner, scaled by its outer probability.
pub fn hyper_to_joint(h: &Hyper) -> JointMatrix {
    let space = h.space();
    let cols = (0..h.len()).map(|k| ObsLabel::atom(format!("c{k}"))).collect();
    let inners: Vec<(&Dist, &Rat)> = h.iter().collect();
    let entries = (0..space.len())
        .map(|x| inners.iter().map(|(d, w)| d.prob(x) * *w).collect())
        .collect();
    JointMatrix::new(space.clone(), cols, entries).expect("hyper columns sum to one")
}

/// Row-stochastic matrix from the inners of `ΔS` to the inners of `ΔI`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefinementMatrix {
    rows: Vec<Dist>,
    cols: Vec<Dist>,
    entries: Vec<Vec<Rat>>,
}

impl RefinementMatrix {
    /// Rows and columns are labelled by inners; each row must sum to one.
    pub fn new(rows: Vec<Dist>, cols: Vec<Dist>, entries: Vec<Vec<Rat>>) -> Result<Self> {
        if entries.len() != rows.len() || entries.iter().any(|r| r.len() != cols.len()) {
            return Err(Error::IndexMismatch(format!(
                "refinement matrix must be {}x{}",
                rows.len(),
                cols.len()
            )));
        }
        for row in &entries {
            if row.iter().any(Signed::is_negative) || !row.iter().sum::<Rat>().is_one() {
                return Err(Error::NotStochastic("refinement matrix row".into()));
            }
        }
        Ok(RefinementMatrix { rows, cols, entries })
    }

    pub fn rows(&self) -> &[Dist] {
        &self.rows
    }

    pub fn cols(&self) -> &[Dist] {
        &self.cols
    }

    pub fn entries(&self) -> &[Vec<Rat>] {
        &self.entries
    }

    /// `self · next`, for chains `ΔS ⊑ ΔM ⊑ ΔI`.
    pub fn then(&self, next: &RefinementMatrix) -> Result<RefinementMatrix> {
        if self.cols != next.rows {
            return Err(Error::IndexMismatch("middle hypers differ".into()));
        }
        RefinementMatrix::new(
            self.rows.clone(),
            next.cols.clone(),
            mat_mul(&self.entries, &next.entries),
        )
    }
}

/// A distribution over hypers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HyperWitness {
    space: Space,
    entries: Vec<(Hyper, Rat)>,
}

impl HyperWitness {
    pub fn from_weighted(space: Space, pairs: impl IntoIterator<Item = (Hyper, Rat)>) -> Result<Self> {
        let mut acc: BTreeMap<Hyper, Rat> = BTreeMap::new();
        for (h, w) in pairs {
            if w.is_negative() {
                return Err(Error::NotADistribution(format!("negative weight {w}")));
            }
            check_space(&space, h.space(), "witness")?;
            *acc.entry(h).or_insert_with(Rat::zero) += w;
        }
        let entries: Vec<(Hyper, Rat)> = acc.into_iter().filter(|(_, w)| !w.is_zero()).collect();
        let total: Rat = entries.iter().map(|(_, w)| w).sum();
        if !total.is_one() {
            return Err(Error::NotADistribution(format!("witness weight {total}")));
        }
        Ok(HyperWitness { space, entries })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Hyper, &Rat)> + '_ {
        self.entries.iter().map(|(h, w)| (h, w))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The hyper obtained by flattening one level: must equal `ΔS`.
    pub fn avg(&self) -> Hyper {
        let pairs = self
            .entries
            .iter()
            .flat_map(|(h, w)| h.iter().map(move |(d, v)| (d.clone(), v * w)));
        Hyper::from_weighted(self.space.clone(), pairs).expect("witness outers sum to one")
    }

    /// Averages each hyper to its inner: must equal `ΔI`.
    pub fn push_avg(&self) -> Hyper {
        let pairs = self.entries.iter().map(|(h, w)| (h.avg(), w.clone()));
        Hyper::from_weighted(self.space.clone(), pairs).expect("witness outers sum to one")
    }
}

#[derive(Clone, Debug)]
pub enum RefinementResult {
    Refines {
        matrix: RefinementMatrix,
        witness: HyperWitness,
    },
    NotRefines {
        separator: LossFunction,
    },
}

impl RefinementResult {
    pub fn refines(&self) -> bool {
        matches!(self, RefinementResult::Refines { .. })
    }
}

fn inners(h: &Hyper) -> (Vec<Dist>, Vec<Rat>) {
    h.iter().map(|(d, w)| (d.clone(), w.clone())).unzip()
}

/// Decides `spec ⊑ imp` exactly.
pub fn check_refinement(spec: &Hyper, imp: &Hyper) -> Result<RefinementResult> {
    check_space(spec.space(), imp.space(), "refinement")?;
    if spec == imp {
        return identity_result(spec);
    }
    let n = spec.space().len();
    let js = hyper_to_joint(spec);
    let ji = hyper_to_joint(imp);
    let (ns, ni) = (spec.len(), imp.len());
    let var = |a: usize, b: usize| a * ni + b;
    let mut a_rows = Vec::with_capacity(n * ni + ns);
    let mut rhs = Vec::with_capacity(n * ni + ns);
    for x in 0..n {
        for b in 0..ni {
            let mut row = vec![Rat::zero(); ns * ni];
            for a in 0..ns {
                row[var(a, b)] = js.entry(x, a).clone();
            }
            a_rows.push(row);
            rhs.push(ji.entry(x, b).clone());
        }
    }
    for a in 0..ns {
        let mut row = vec![Rat::zero(); ns * ni];
        for b in 0..ni {
            row[var(a, b)] = Rat::one();
        }
        a_rows.push(row);
        rhs.push(Rat::one());
    }
    match lp::feasible(&a_rows, &rhs)? {
        Feasibility::Feasible(v) => {
            let (srows, _) = inners(spec);
            let (icols, _) = inners(imp);
            let entries = (0..ns)
                .map(|a| (0..ni).map(|b| v[var(a, b)].clone()).collect())
                .collect();
            let matrix = RefinementMatrix::new(srows, icols, entries)?;
            let witness = matrix_witness_to_hyper_witness(spec, &matrix)?;
            Ok(RefinementResult::Refines { matrix, witness })
        }
        Feasibility::Infeasible(cert) => {
            let table: Vec<Vec<Rat>> = (0..ni)
                .map(|b| (0..n).map(|x| cert[x * ni + b].clone()).collect())
                .collect();
            let separator = separator_from_table(spec, imp, table)?;
            Ok(RefinementResult::NotRefines { separator })
        }
    }
}

// The LP may return any vertex; for equal hypers the identity is the
// expected answer.
fn identity_result(h: &Hyper) -> Result<RefinementResult> {
    let (ds, _) = inners(h);
    let k = ds.len();
    let entries = (0..k)
        .map(|a| (0..k).map(|b| if a == b { Rat::one() } else { Rat::zero() }).collect())
        .collect();
    let matrix = RefinementMatrix::new(ds.clone(), ds, entries)?;
    let witness = matrix_witness_to_hyper_witness(h, &matrix)?;
    Ok(RefinementResult::Refines { matrix, witness })
}

/// Shifts a certificate table to be non-negative and confirms that it
/// separates; otherwise searches a few standard loss functions.
fn separator_from_table(spec: &Hyper, imp: &Hyper, table: Vec<Vec<Rat>>) -> Result<LossFunction> {
    let space = spec.space().clone();
    let low = table.iter().flatten().min().cloned().unwrap_or_else(Rat::zero);
    let shift = if low.is_negative() { -low } else { Rat::zero() };
    let shifted = table
        .iter()
        .map(|row| row.iter().map(|v| v + &shift).collect())
        .collect();
    let labels = (0..imp.len()).map(|b| format!("w{b}")).collect();
    let candidate = LossFunction::new(space.clone(), labels, shifted)?;
    if separates(&candidate, spec, imp) {
        return Ok(candidate);
    }
    for fallback in fallback_losses(&space)? {
        if separates(&fallback, spec, imp) {
            return Ok(fallback);
        }
    }
    Err(Error::NoSeparator)
}

fn separates(l: &LossFunction, spec: &Hyper, imp: &Hyper) -> bool {
    match (l.expect_hyper(spec), l.expect_hyper(imp)) {
        (Ok(s), Ok(i)) => s > i,
        _ => false,
    }
}

fn fallback_losses(space: &Space) -> Result<Vec<LossFunction>> {
    let n = space.len();
    let mut out = vec![LossFunction::bayes_risk(space.clone())];
    if n <= 12 {
        for mask in 1..(1u32 << n) - 1 {
            let inside: Vec<Rat> = (0..n)
                .map(|x| if mask >> x & 1 == 1 { Rat::zero() } else { Rat::one() })
                .collect();
            let outside = inside.iter().map(|v| Rat::one() - v).collect();
            out.push(LossFunction::new(
                space.clone(),
                vec!["in".into(), "out".into()],
                vec![inside, outside],
            )?);
        }
    }
    Ok(out)
}

/// `Δ̲ := ⟦ΔS ▹ R⟧`, read as a distribution over hypers on the inners of `ΔS`.
pub fn matrix_witness_to_hyper_witness(spec: &Hyper, r: &RefinementMatrix) -> Result<HyperWitness> {
    let (srows, sw) = inners(spec);
    if srows != r.rows {
        return Err(Error::IndexMismatch(
            "matrix rows are not the inners of the specification".into(),
        ));
    }
    let space = spec.space().clone();
    let mut pairs = Vec::with_capacity(r.cols.len());
    for b in 0..r.cols.len() {
        let column: Vec<(Dist, Rat)> = srows
            .iter()
            .zip(&sw)
            .zip(&r.entries)
            .map(|((d, w), row)| (d.clone(), w * &row[b]))
            .filter(|(_, v)| !v.is_zero())
            .collect();
        let mass: Rat = column.iter().map(|(_, v)| v).sum();
        if mass.is_zero() {
            continue;
        }
        let hyper = Hyper::from_weighted(space.clone(), column.into_iter().map(|(d, v)| (d, v / &mass)))?;
        pairs.push((hyper, mass));
    }
    HyperWitness::from_weighted(space, pairs)
}

/// Recovers `R` from a distribution over hypers. Rows are the inners of the
/// flattened witness, columns the averages of its hypers.
pub fn hyper_witness_to_matrix(w: &HyperWitness) -> Result<RefinementMatrix> {
    let spec = w.avg();
    let imp = w.push_avg();
    let (srows, sw) = inners(&spec);
    let (icols, _) = inners(&imp);
    let mut entries = vec![vec![Rat::zero(); icols.len()]; srows.len()];
    for (h, weight) in w.iter() {
        let b = icols
            .binary_search(&h.avg())
            .map_err(|_| Error::IndexMismatch("average missing from implementation".into()))?;
        for (d, v) in h.iter() {
            let a = srows
                .binary_search(d)
                .map_err(|_| Error::IndexMismatch("inner missing from specification".into()))?;
            if sw[a].is_zero() {
                return Err(Error::DegenerateWitness(format!("inner {d} has zero weight")));
            }
            entries[a][b] += weight * v / &sw[a];
        }
    }
    RefinementMatrix::new(srows, icols, entries)
}

/// `spec ⊑ imp` and `spec ≠ imp`.
pub fn strict_refines(spec: &Hyper, imp: &Hyper) -> Result<bool> {
    Ok(spec != imp && check_refinement(spec, imp)?.refines())
}

/// Optimal transport between outers, with total variation between inners as
/// the ground cost.
pub fn kantorovich_hyper(a: &Hyper, b: &Hyper) -> Result<Rat> {
    check_space(a.space(), b.space(), "distance")?;
    let (da, wa) = inners(a);
    let (db, wb) = inners(b);
    let (na, nb) = (da.len(), db.len());
    let mut cost = Vec::with_capacity(na * nb);
    for x in &da {
        for y in &db {
            cost.push(kantorovich_dist(x, y)?);
        }
    }
    let mut rows = Vec::with_capacity(na + nb);
    let mut rhs = Vec::with_capacity(na + nb);
    for i in 0..na {
        let mut row = vec![Rat::zero(); na * nb];
        for j in 0..nb {
            row[i * nb + j] = Rat::one();
        }
        rows.push(row);
        rhs.push(wa[i].clone());
    }
    for j in 0..nb {
        let mut row = vec![Rat::zero(); na * nb];
        for i in 0..na {
            row[i * nb + j] = Rat::one();
        }
        rows.push(row);
        rhs.push(wb[j].clone());
    }
    match lp::minimize(&cost, &rows, &rhs)? {
        Optimum::Optimal { value, .. } => Ok(value),
        _ => unreachable!("transport problems with equal masses are feasible and bounded"),
    }
}
