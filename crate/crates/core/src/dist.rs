//! Distributions, sub-distributions and hypers over a finite state space.
//!
//! Values are stored sparsely: a map from state index to a strictly positive
//! rational. Two values are equal exactly when they assign the same mass to
//! every state, so structural equality is semantic equality.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rat::{is_probability, Rat};

/// Ordered, duplicate-free list of state labels.
#[derive(Debug)]
pub struct StateSpace {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

/// State spaces are shared between every value defined over them.
pub type Space = Arc<StateSpace>;

impl StateSpace {
    pub fn new<I, S>(labels: I) -> Result<Space>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidSpace("no states".into()));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if label.is_empty() {
                return Err(Error::InvalidSpace("empty label".into()));
            }
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::InvalidSpace(format!("duplicate label `{label}`")));
            }
        }
        Ok(Arc::new(StateSpace { labels, index }))
    }

    /// All bit strings of width `n` in numeric order, e.g. `00 01 10 11`.
    pub fn bits(n: usize) -> Result<Space> {
        if n == 0 || n > 20 {
            return Err(Error::UnsupportedWidth(n));
        }
        StateSpace::new((0..1usize << n).map(|v| format!("{v:0n$b}")))
    }

    /// Pairs `x,z` in row-major order: every `z` for the first `x`, then the
    /// next `x`, and so on.
    pub fn product(&self, other: &StateSpace) -> Result<Space> {
        let mut labels = Vec::with_capacity(self.len() * other.len());
        for x in &self.labels {
            for z in &other.labels {
                labels.push(format!("{x},{z}"));
            }
        }
        StateSpace::new(labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn require(&self, label: &str) -> Result<usize> {
        self.index_of(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }
}

impl PartialEq for StateSpace {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels
    }
}

impl Eq for StateSpace {}

impl Hash for StateSpace {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.labels.hash(state);
    }
}

pub(crate) fn same_space(a: &Space, b: &Space) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

pub(crate) fn check_space(a: &Space, b: &Space, what: &str) -> Result<()> {
    if same_space(a, b) {
        Ok(())
    } else {
        Err(Error::SpaceMismatch(format!(
            "{what}: [{}] vs [{}]",
            a.labels.join(" "),
            b.labels.join(" ")
        )))
    }
}

fn canonical(pairs: impl IntoIterator<Item = (usize, Rat)>) -> Vec<(usize, Rat)> {
    let mut acc: BTreeMap<usize, Rat> = BTreeMap::new();
    for (i, p) in pairs {
        *acc.entry(i).or_insert_with(Rat::zero) += p;
    }
    acc.into_iter().filter(|(_, p)| !p.is_zero()).collect()
}

fn validate(space: &Space, entries: &[(usize, Rat)]) -> Result<()> {
    for (i, p) in entries {
        if *i >= space.len() {
            return Err(Error::DimensionMismatch(format!(
                "state index {i} outside a space of {} states",
                space.len()
            )));
        }
        if p.is_negative() {
            return Err(Error::NotADistribution(format!("negative mass {p}")));
        }
    }
    Ok(())
}

fn lookup(entries: &[(usize, Rat)], i: usize) -> Option<&Rat> {
    entries
        .binary_search_by_key(&i, |(j, _)| *j)
        .ok()
        .map(|k| &entries[k].1)
}

/// Lexicographic order of the dense vectors, without densifying.
fn cmp_sparse(a: &[(usize, Rat)], b: &[(usize, Rat)]) -> Ordering {
    let (mut ia, mut ib) = (a.iter(), b.iter());
    loop {
        match (ia.next(), ib.next()) {
            (None, None) => return Ordering::Equal,
            (Some(_), None) => return Ordering::Greater,
            (None, Some(_)) => return Ordering::Less,
            (Some((i, p)), Some((j, q))) => match i.cmp(j) {
                // a has mass where b has none
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
                Ordering::Equal => match p.cmp(q) {
                    Ordering::Equal => continue,
                    other => return other,
                },
            },
        }
    }
}

fn sum(entries: &[(usize, Rat)]) -> Rat {
    entries.iter().fold(Rat::zero(), |acc, (_, p)| acc + p)
}

/// A finite measure of total weight at most one.
#[derive(Clone, Debug)]
pub struct SubDist {
    space: Space,
    entries: Vec<(usize, Rat)>,
}

impl SubDist {
    pub fn zero(space: Space) -> Self {
        SubDist {
            space,
            entries: Vec::new(),
        }
    }

    /// Builds from `(index, mass)` pairs; repeated indices accumulate.
    pub fn from_pairs(space: Space, pairs: impl IntoIterator<Item = (usize, Rat)>) -> Result<Self> {
        let entries = canonical(pairs);
        validate(&space, &entries)?;
        let w = sum(&entries);
        if w > Rat::one() {
            return Err(Error::NotADistribution(format!("weight {w} exceeds 1")));
        }
        Ok(SubDist { space, entries })
    }

    pub fn from_dense(space: Space, values: &[Rat]) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {} states",
                values.len(),
                space.len()
            )));
        }
        Self::from_pairs(space, values.iter().cloned().enumerate())
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    /// Total mass.
    pub fn weight(&self) -> Rat {
        sum(&self.entries)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn prob(&self, i: usize) -> Rat {
        lookup(&self.entries, i).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Rat)> + '_ {
        self.entries.iter().map(|(i, p)| (*i, p))
    }

    pub fn support(&self) -> Vec<usize> {
        self.entries.iter().map(|(i, _)| *i).collect()
    }

    pub fn dense(&self) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); self.space.len()];
        for (i, p) in &self.entries {
            out[*i] = p.clone();
        }
        out
    }

    /// Rescales to weight one.
    pub fn normalize(&self) -> Result<Dist> {
        let w = self.weight();
        if w.is_zero() {
            return Err(Error::ZeroWeight);
        }
        Ok(Dist {
            space: self.space.clone(),
            entries: self.entries.iter().map(|(i, p)| (*i, p / &w)).collect(),
        })
    }
}

impl PartialEq for SubDist {
    fn eq(&self, other: &Self) -> bool {
        same_space(&self.space, &other.space) && self.entries == other.entries
    }
}

impl Eq for SubDist {}

/// A probability distribution: a sub-distribution of weight exactly one.
#[derive(Clone, Debug)]
pub struct Dist {
    space: Space,
    entries: Vec<(usize, Rat)>,
}

impl Dist {
    pub fn from_pairs(space: Space, pairs: impl IntoIterator<Item = (usize, Rat)>) -> Result<Self> {
        let entries = canonical(pairs);
        validate(&space, &entries)?;
        let w = sum(&entries);
        if !w.is_one() {
            return Err(Error::NotADistribution(format!("weight {w}, expected 1")));
        }
        Ok(Dist { space, entries })
    }

    pub fn from_dense(space: Space, values: &[Rat]) -> Result<Self> {
        SubDist::from_dense(space.clone(), values).and_then(|s| Dist::from_pairs(space, s.entries))
    }

    pub fn from_labels<'a>(space: Space, pairs: impl IntoIterator<Item = (&'a str, Rat)>) -> Result<Self> {
        let mut indexed = Vec::new();
        for (label, p) in pairs {
            indexed.push((space.require(label)?, p));
        }
        Dist::from_pairs(space, indexed)
    }

    pub fn point(space: Space, label: &str) -> Result<Self> {
        let i = space.require(label)?;
        Ok(Dist::point_at(space, i))
    }

    pub fn point_at(space: Space, i: usize) -> Self {
        assert!(i < space.len(), "state index out of range");
        Dist {
            space,
            entries: vec![(i, Rat::one())],
        }
    }

    /// `z` with probability `p`, otherwise `z2`.
    pub fn two_point(space: Space, z: &str, z2: &str, p: &Rat) -> Result<Self> {
        if !is_probability(p) {
            return Err(Error::BadProbability(p.clone()));
        }
        let (i, j) = (space.require(z)?, space.require(z2)?);
        Dist::from_pairs(space, [(i, p.clone()), (j, Rat::one() - p)])
    }

    pub fn uniform(space: Space) -> Self {
        let n = Rat::from_integer(space.len().into());
        let entries = (0..space.len()).map(|i| (i, n.recip())).collect();
        Dist { space, entries }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn prob(&self, i: usize) -> Rat {
        lookup(&self.entries, i).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn prob_of(&self, label: &str) -> Result<Rat> {
        Ok(self.prob(self.space.require(label)?))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Rat)> + '_ {
        self.entries.iter().map(|(i, p)| (*i, p))
    }

    pub fn support(&self) -> Vec<usize> {
        self.entries.iter().map(|(i, _)| *i).collect()
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn dense(&self) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); self.space.len()];
        for (i, p) in &self.entries {
            out[*i] = p.clone();
        }
        out
    }

    pub fn as_sub(&self) -> SubDist {
        SubDist {
            space: self.space.clone(),
            entries: self.entries.clone(),
        }
    }

    /// Sub-distribution `scale * self`.
    pub fn scaled(&self, scale: &Rat) -> Result<SubDist> {
        if !is_probability(scale) {
            return Err(Error::BadProbability(scale.clone()));
        }
        SubDist::from_pairs(self.space.clone(), self.entries.iter().map(|(i, p)| (*i, p * scale)))
    }

    /// `E_self f`.
    pub fn expect(&self, f: impl Fn(usize) -> Rat) -> Rat {
        self.entries.iter().fold(Rat::zero(), |acc, (i, p)| acc + p * f(*i))
    }

    /// `p * a + (1 - p) * b`.
    pub fn weighted_sum(a: &Dist, b: &Dist, p: &Rat) -> Result<Dist> {
        if !is_probability(p) {
            return Err(Error::BadProbability(p.clone()));
        }
        check_space(&a.space, &b.space, "weighted sum")?;
        let q = Rat::one() - p;
        let pairs = a
            .entries
            .iter()
            .map(|(i, x)| (*i, x * p))
            .chain(b.entries.iter().map(|(i, x)| (*i, x * &q)));
        Ok(Dist {
            space: a.space.clone(),
            entries: canonical(pairs),
        })
    }

    /// Image under a state map, e.g. a projection onto one component.
    pub fn map_states(&self, target: Space, f: impl Fn(usize) -> usize) -> Result<Dist> {
        Dist::from_pairs(target, self.entries.iter().map(|(i, p)| (f(*i), p.clone())))
    }

    /// Re-attaches this distribution to an equal space held by another `Arc`.
    pub fn with_space(&self, space: Space) -> Result<Dist> {
        check_space(&self.space, &space, "rebind")?;
        Ok(Dist {
            space,
            entries: self.entries.clone(),
        })
    }
}

impl PartialEq for Dist {
    fn eq(&self, other: &Self) -> bool {
        same_space(&self.space, &other.space) && self.entries == other.entries
    }
}

impl Eq for Dist {}

impl Hash for Dist {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.entries.hash(state);
    }
}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> Ordering {
        if !same_space(&self.space, &other.space) {
            return self.space.labels.cmp(&other.space.labels);
        }
        cmp_sparse(&self.entries, &other.entries)
    }
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, (i, p)) in self.entries.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}: {p}", self.space.label(*i))?;
        }
        write!(f, "}}")
    }
}

/// Total-variation distance, which is the Kantorovich distance under the
/// discrete metric on states.
pub fn kantorovich_dist(a: &Dist, b: &Dist) -> Result<Rat> {
    check_space(&a.space, &b.space, "distance")?;
    let mut total = Rat::zero();
    for i in 0..a.space.len() {
        total += (a.prob(i) - b.prob(i)).abs();
    }
    Ok(total / Rat::from_integer(2.into()))
}

fn canonical_outer(pairs: impl IntoIterator<Item = (Dist, Rat)>) -> Result<Vec<(Dist, Rat)>> {
    let mut acc: BTreeMap<Dist, Rat> = BTreeMap::new();
    for (d, w) in pairs {
        if w.is_negative() {
            return Err(Error::NotADistribution(format!("negative outer weight {w}")));
        }
        *acc.entry(d).or_insert_with(Rat::zero) += w;
    }
    Ok(acc.into_iter().filter(|(_, w)| !w.is_zero()).collect())
}

fn outer_space(space: &Space, entries: &[(Dist, Rat)]) -> Result<()> {
    for (d, _) in entries {
        check_space(space, &d.space, "inner")?;
    }
    Ok(())
}

/// A distribution over inner distributions, kept merged and sorted.
#[derive(Clone, Debug)]
pub struct Hyper {
    space: Space,
    entries: Vec<(Dist, Rat)>,
}

impl Hyper {
    /// The hyper that is certain of `inner`.
    pub fn point(inner: Dist) -> Hyper {
        Hyper {
            space: inner.space.clone(),
            entries: vec![(inner, Rat::one())],
        }
    }

    /// Builds from `(inner, outer)` pairs in any order; equal inners merge.
    pub fn from_weighted(space: Space, pairs: impl IntoIterator<Item = (Dist, Rat)>) -> Result<Hyper> {
        let entries = canonical_outer(pairs)?;
        outer_space(&space, &entries)?;
        let w = entries.iter().fold(Rat::zero(), |acc, (_, w)| acc + w);
        if !w.is_one() {
            return Err(Error::NotADistribution(format!("outer weight {w}, expected 1")));
        }
        Ok(Hyper { space, entries })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_point(&self) -> bool {
        self.entries.len() == 1
    }

    /// Inners with their outer probabilities, in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (&Dist, &Rat)> + '_ {
        self.entries.iter().map(|(d, w)| (d, w))
    }

    pub fn outer(&self, inner: &Dist) -> Rat {
        self.entries
            .binary_search_by(|(d, _)| d.cmp(inner))
            .map(|k| self.entries[k].1.clone())
            .unwrap_or_else(|_| Rat::zero())
    }

    /// The average of the inners, weighted by the outer.
    pub fn avg(&self) -> Dist {
        let pairs = self
            .entries
            .iter()
            .flat_map(|(d, w)| d.entries.iter().map(move |(i, p)| (*i, p * w)));
        Dist {
            space: self.space.clone(),
            entries: canonical(pairs),
        }
    }

    /// Transports each outer weight to `f(inner)`. The result lives on the
    /// space of the images, so projections are allowed.
    pub fn push_forward(&self, f: impl Fn(&Dist) -> Dist) -> Result<Hyper> {
        let images: Vec<(Dist, Rat)> = self.entries.iter().map(|(d, w)| (f(d), w.clone())).collect();
        let space = images[0].0.space.clone();
        Hyper::from_weighted(space, images)
    }

    pub fn expect(&self, u: impl Fn(&Dist) -> Rat) -> Rat {
        self.entries.iter().fold(Rat::zero(), |acc, (d, w)| acc + w * u(d))
    }

    pub fn expect_f64(&self, u: impl Fn(&Dist) -> f64) -> f64 {
        self.entries.iter().map(|(d, w)| crate::rat::to_f64(w) * u(d)).sum()
    }

    /// `p * a + (1 - p) * b` as a mixture of outers.
    pub fn weighted_sum(a: &Hyper, b: &Hyper, p: &Rat) -> Result<Hyper> {
        if !is_probability(p) {
            return Err(Error::BadProbability(p.clone()));
        }
        check_space(&a.space, &b.space, "weighted sum")?;
        let q = Rat::one() - p;
        let pairs = a
            .entries
            .iter()
            .map(|(d, w)| (d.clone(), w * p))
            .chain(b.entries.iter().map(|(d, w)| (d.clone(), w * &q)));
        Hyper::from_weighted(a.space.clone(), pairs)
    }

    pub fn as_sub(&self) -> SubHyper {
        SubHyper {
            space: self.space.clone(),
            entries: self.entries.clone(),
        }
    }
}

impl PartialEq for Hyper {
    fn eq(&self, other: &Self) -> bool {
        same_space(&self.space, &other.space) && self.entries == other.entries
    }
}

impl Eq for Hyper {}

impl Hash for Hyper {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.entries.hash(state);
    }
}

impl PartialOrd for Hyper {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Hyper {
    fn cmp(&self, other: &Self) -> Ordering {
        self.entries.cmp(&other.entries)
    }
}

impl fmt::Display for Hyper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, (d, w)) in self.entries.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{d} @ {w}")?;
        }
        write!(f, "]")
    }
}

/// A hyper whose outer may weigh less than one. Inners are still proper
/// distributions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubHyper {
    space: Space,
    entries: Vec<(Dist, Rat)>,
}

impl SubHyper {
    pub fn empty(space: Space) -> Self {
        SubHyper {
            space,
            entries: Vec::new(),
        }
    }

    /// All of the weight of `d`, concentrated on its normalisation.
    pub fn sub_point(d: &SubDist) -> SubHyper {
        match d.normalize() {
            Ok(inner) => SubHyper {
                space: d.space.clone(),
                entries: vec![(inner, d.weight())],
            },
            Err(_) => SubHyper::empty(d.space.clone()),
        }
    }

    pub fn from_weighted(space: Space, pairs: impl IntoIterator<Item = (Dist, Rat)>) -> Result<Self> {
        let entries = canonical_outer(pairs)?;
        outer_space(&space, &entries)?;
        let w = entries.iter().fold(Rat::zero(), |acc, (_, w)| acc + w);
        if w > Rat::one() {
            return Err(Error::NotADistribution(format!("outer weight {w} exceeds 1")));
        }
        Ok(SubHyper { space, entries })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn weight(&self) -> Rat {
        self.entries.iter().fold(Rat::zero(), |acc, (_, w)| acc + w)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Dist, &Rat)> + '_ {
        self.entries.iter().map(|(d, w)| (d, w))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sum of two sub-hypers; fails if the total weight exceeds one.
    pub fn add(&self, other: &SubHyper) -> Result<SubHyper> {
        check_space(&self.space, &other.space, "sub-hyper sum")?;
        SubHyper::from_weighted(
            self.space.clone(),
            self.entries.iter().chain(other.entries.iter()).cloned(),
        )
    }

    pub fn into_hyper(self) -> Result<Hyper> {
        Hyper::from_weighted(self.space, self.entries)
    }
}
