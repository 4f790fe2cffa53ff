//! Abstract HMMs: functions from priors to hypers.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::Zero;

use crate::dist::{check_space, Dist, Hyper, Space};
use crate::error::{Error, Result};
use crate::matrix::{ChannelMatrix, HmmTensor, JointMatrix, MarkovMatrix};
use crate::random::{self, TrialRng};
use crate::rat::Rat;
use crate::refinement::check_refinement;

/// Default column bound for [`AbstractHmm::materialize`].
pub const MATERIALIZE_BOUND: usize = 4096;

pub type HyperFn = dyn Fn(&Dist) -> Result<Hyper> + Send + Sync;

/// Collapses a joint matrix to its hyper: each nonzero column becomes an
/// inner weighted by its mass, and proportional columns merge.
pub fn abstract_joint(joint: &JointMatrix) -> Hyper {
    let rows = joint.rows().clone();
    let pairs = (0..joint.cols().len()).filter_map(|y| {
        let col = joint.column(y);
        col.normalize().ok().map(|inner| (inner, col.weight()))
    });
    Hyper::from_weighted(rows, pairs).expect("joint columns sum to one")
}

/// An abstract HMM, kept as a tree and evaluated per prior.
#[derive(Clone)]
pub enum AbstractHmm {
    Identity(Space),
    Channel(Arc<ChannelMatrix>),
    Markov(Arc<MarkovMatrix>),
    Tensor(Arc<HmmTensor>),
    Seq(Box<AbstractHmm>, Box<AbstractHmm>),
    /// Arbitrary prior-to-hyper map; may fall outside the matrix-denoted
    /// programs.
    Custom {
        space: Space,
        name: String,
        f: Arc<HyperFn>,
    },
}

impl fmt::Debug for AbstractHmm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbstractHmm::Identity(_) => write!(f, "Identity"),
            AbstractHmm::Channel(c) => write!(f, "Channel({} cols)", c.cols().len()),
            AbstractHmm::Markov(_) => write!(f, "Markov"),
            AbstractHmm::Tensor(t) => write!(f, "Tensor({} obs)", t.obs().len()),
            AbstractHmm::Seq(a, b) => write!(f, "Seq({a:?}, {b:?})"),
            AbstractHmm::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

impl AbstractHmm {
    pub fn identity(space: Space) -> Self {
        AbstractHmm::Identity(space)
    }

    pub fn denote_channel(c: ChannelMatrix) -> Self {
        AbstractHmm::Channel(Arc::new(c))
    }

    pub fn denote_markov(m: MarkovMatrix) -> Self {
        AbstractHmm::Markov(Arc::new(m))
    }

    pub fn denote_hmm(h: HmmTensor) -> Self {
        AbstractHmm::Tensor(Arc::new(h))
    }

    pub fn custom(
        space: Space,
        name: impl Into<String>,
        f: impl Fn(&Dist) -> Result<Hyper> + Send + Sync + 'static,
    ) -> Self {
        AbstractHmm::Custom {
            space,
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn space(&self) -> &Space {
        match self {
            AbstractHmm::Identity(s) => s,
            AbstractHmm::Channel(c) => c.rows(),
            AbstractHmm::Markov(m) => m.space(),
            AbstractHmm::Tensor(t) => t.space(),
            AbstractHmm::Seq(a, _) => a.space(),
            AbstractHmm::Custom { space, .. } => space,
        }
    }

    /// Kleisli composition: run `self`, then `next` on every inner.
    pub fn then(self, next: AbstractHmm) -> Result<AbstractHmm> {
        check_space(self.space(), next.space(), "sequential composition")?;
        Ok(match (self, next) {
            (AbstractHmm::Identity(_), b) => b,
            (a, AbstractHmm::Identity(_)) => a,
            (a, b) => AbstractHmm::Seq(Box::new(a), Box::new(b)),
        })
    }

    /// Output hyper for `prior`.
    pub fn eval(&self, prior: &Dist) -> Result<Hyper> {
        check_space(self.space(), prior.space(), "prior")?;
        match self {
            AbstractHmm::Identity(_) => Ok(Hyper::point(prior.clone())),
            AbstractHmm::Channel(c) => Ok(abstract_joint(&c.apply_prior(prior)?)),
            AbstractHmm::Markov(m) => Ok(Hyper::point(m.apply(prior)?)),
            AbstractHmm::Tensor(t) => Ok(abstract_joint(&t.joint(prior)?)),
            AbstractHmm::Seq(a, b) => {
                let first = a.eval(prior)?;
                let mut acc: BTreeMap<Dist, Rat> = BTreeMap::new();
                for (inner, w) in first.iter() {
                    for (d, v) in b.eval(inner)?.iter() {
                        *acc.entry(d.clone()).or_insert_with(Rat::zero) += w * v;
                    }
                }
                Hyper::from_weighted(self.space().clone(), acc)
            }
            AbstractHmm::Custom { f, .. } => f(prior),
        }
    }

    /// Whether the tree is built only from matrices.
    pub fn is_matrix_denoted(&self) -> bool {
        match self {
            AbstractHmm::Custom { .. } => false,
            AbstractHmm::Seq(a, b) => a.is_matrix_denoted() && b.is_matrix_denoted(),
            _ => true,
        }
    }

    /// Multiplies the tree out into one tensor, provided the observation
    /// alphabet stays within `bound` columns.
    pub fn materialize(&self, bound: usize) -> Result<HmmTensor> {
        match self {
            AbstractHmm::Identity(s) => Ok(HmmTensor::pure_markov(&MarkovMatrix::identity(s.clone()))),
            AbstractHmm::Channel(c) => Ok(HmmTensor::pure_channel(c)),
            AbstractHmm::Markov(m) => Ok(HmmTensor::pure_markov(m)),
            AbstractHmm::Tensor(t) => Ok((**t).clone()),
            AbstractHmm::Seq(a, b) => {
                let ta = a.materialize(bound)?;
                let tb = b.materialize(bound)?;
                let cols = ta.obs().len().saturating_mul(tb.obs().len());
                if cols > bound {
                    return Err(Error::NotMaterialized(format!(
                        "{cols} observation columns exceed the bound of {bound}"
                    )));
                }
                ta.compose(&tb)
            }
            AbstractHmm::Custom { name, .. } => {
                Err(Error::NotMaterialized(format!("`{name}` is not given by a matrix")))
            }
        }
    }

    /// Pointwise equality at the given priors.
    pub fn agree_on(&self, other: &AbstractHmm, priors: &[Dist]) -> Result<bool> {
        for p in priors {
            if self.eval(p)? != other.eval(p)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// One failed trial of [`check_super_linear`].
#[derive(Clone, Debug)]
pub struct SuperLinearFailure {
    pub prior1: Dist,
    pub prior2: Dist,
    pub p: Rat,
}

#[derive(Clone, Debug, Default)]
pub struct SuperLinearReport {
    pub trials: usize,
    pub failures: Vec<SuperLinearFailure>,
}

impl SuperLinearReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Tests `h.π1 ₊p h.π2 ⊑ h.(π1 ₊p π2)` on random triples.
pub fn check_super_linear(h: &AbstractHmm, trials: usize, rng: &mut TrialRng) -> Result<SuperLinearReport> {
    let space = h.space().clone();
    let mut report = SuperLinearReport {
        trials,
        failures: Vec::new(),
    };
    for _ in 0..trials {
        let prior1 = random::dist(rng, &space);
        let prior2 = random::dist(rng, &space);
        let p = random::probability(rng);
        let lhs = Hyper::weighted_sum(&h.eval(&prior1)?, &h.eval(&prior2)?, &p)?;
        let rhs = h.eval(&Dist::weighted_sum(&prior1, &prior2, &p)?)?;
        if !check_refinement(&lhs, &rhs)?.refines() {
            report.failures.push(SuperLinearFailure { prior1, prior2, p });
        }
    }
    Ok(report)
}

/// The prior-dependent channel `C^π = [[π0, π1], [0, 1]]` over a two-state
/// space, applied to `π` itself. Its average is always `π`, yet no single
/// channel matrix denotes it.
pub fn prior_indexed_cheat(space: Space) -> Result<AbstractHmm> {
    if space.len() != 2 {
        return Err(Error::SpaceMismatch("the cheat needs exactly two states".into()));
    }
    let rows = space.clone();
    Ok(AbstractHmm::custom(
        space,
        "prior-indexed channel",
        move |prior: &Dist| {
            let (p0, p1) = (prior.prob(0), prior.prob(1));
            let c = ChannelMatrix::new(
                rows.clone(),
                random::obs_labels(2),
                vec![vec![p0, p1], vec![Rat::zero(), num_traits::One::one()]],
            )?;
            Ok(abstract_joint(&c.apply_prior(prior)?))
        },
    ))
}
