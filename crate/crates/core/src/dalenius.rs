//! Extension of programs over `X` to `X × Z`, where `Z` is data the program
//! never touches but which may be correlated with the initial state.

use num_traits::Zero;

use crate::dist::{check_space, Dist, Hyper, Space, StateSpace};
use crate::error::{Error, Result};
use crate::matrix::{ChannelMatrix, HmmTensor, MarkovMatrix};
use crate::rat::Rat;
use crate::semantics::AbstractHmm;

/// `X × Z` with the component spaces kept around for projections.
#[derive(Clone, Debug)]
pub struct ProductSpace {
    pub x: Space,
    pub z: Space,
    pub xz: Space,
}

impl ProductSpace {
    pub fn new(x: Space, z: Space) -> Result<Self> {
        let xz = x.product(&z)?;
        Ok(ProductSpace { x, z, xz })
    }

    pub fn index(&self, x: usize, z: usize) -> usize {
        x * self.z.len() + z
    }

    pub fn split(&self, i: usize) -> (usize, usize) {
        (i / self.z.len(), i % self.z.len())
    }

    pub fn project_x(&self, d: &Dist) -> Result<Dist> {
        check_space(&self.xz, d.space(), "projection")?;
        d.map_states(self.x.clone(), |i| self.split(i).0)
    }

    pub fn project_z(&self, d: &Dist) -> Result<Dist> {
        check_space(&self.xz, d.space(), "projection")?;
        d.map_states(self.z.clone(), |i| self.split(i).1)
    }

    /// `π_X × π_Z`: no correlation.
    pub fn independent(&self, px: &Dist, pz: &Dist) -> Result<Dist> {
        check_space(&self.x, px.space(), "x marginal")?;
        check_space(&self.z, pz.space(), "z marginal")?;
        let pairs = px
            .iter()
            .flat_map(|(x, p)| pz.iter().map(move |(z, q)| (self.index(x, z), p * q)));
        Dist::from_pairs(self.xz.clone(), pairs)
    }
}

/// `Z` as a copy of `X` whose value equals the initial state.
pub fn copy_space(x: &Space) -> Result<Space> {
    StateSpace::new(x.labels().to_vec())
}

/// Prior over `X × X` putting `π[x]` on `(x, x)`.
pub fn perfectly_correlated(p: &ProductSpace, px: &Dist) -> Result<Dist> {
    if p.x.labels() != p.z.labels() {
        return Err(Error::SpaceMismatch("copy prior needs Z = X".into()));
    }
    check_space(&p.x, px.space(), "x marginal")?;
    Dist::from_pairs(p.xz.clone(), px.iter().map(|(x, q)| (p.index(x, x), q.clone())))
}

/// `(C × Z)[(x,z)][y] = C[x][y]`.
pub fn extend_channel(c: &ChannelMatrix, p: &ProductSpace) -> Result<ChannelMatrix> {
    check_space(c.rows(), &p.x, "channel")?;
    let entries = (0..p.xz.len()).map(|i| c.entries()[p.split(i).0].clone()).collect();
    ChannelMatrix::new(p.xz.clone(), c.cols().to_vec(), entries)
}

/// `(M × Z)[(x,z)][(x',z')] = M[x][x']` when `z = z'`, else 0.
pub fn extend_markov(m: &MarkovMatrix, p: &ProductSpace) -> Result<MarkovMatrix> {
    check_space(m.space(), &p.x, "markov")?;
    let n = p.xz.len();
    let entries = (0..n)
        .map(|i| {
            let (x, z) = p.split(i);
            (0..n)
                .map(|j| {
                    let (x2, z2) = p.split(j);
                    if z == z2 {
                        m.entry(x, x2).clone()
                    } else {
                        Rat::zero()
                    }
                })
                .collect()
        })
        .collect();
    MarkovMatrix::new(p.xz.clone(), entries)
}

pub fn extend_tensor(t: &HmmTensor, p: &ProductSpace) -> Result<HmmTensor> {
    check_space(t.space(), &p.x, "tensor")?;
    let n = p.xz.len();
    let m = t.obs().len();
    let mut data = Vec::with_capacity(n * m * n);
    for i in 0..n {
        let (x, z) = p.split(i);
        for y in 0..m {
            for j in 0..n {
                let (x2, z2) = p.split(j);
                data.push(if z == z2 { t.get(x, y, x2).clone() } else { Rat::zero() });
            }
        }
    }
    HmmTensor::new(p.xz.clone(), t.obs().to_vec(), data)
}

/// Lifts every matrix in a program tree to `X × Z`.
pub fn extend_hmm(h: &AbstractHmm, p: &ProductSpace) -> Result<AbstractHmm> {
    check_space(h.space(), &p.x, "program")?;
    Ok(match h {
        AbstractHmm::Identity(_) => AbstractHmm::identity(p.xz.clone()),
        AbstractHmm::Channel(c) => AbstractHmm::denote_channel(extend_channel(c, p)?),
        AbstractHmm::Markov(m) => AbstractHmm::denote_markov(extend_markov(m, p)?),
        AbstractHmm::Tensor(t) => AbstractHmm::denote_hmm(extend_tensor(t, p)?),
        AbstractHmm::Seq(a, b) => AbstractHmm::Seq(Box::new(extend_hmm(a, p)?), Box::new(extend_hmm(b, p)?)),
        AbstractHmm::Custom { name, .. } => {
            return Err(Error::NotMaterialized(format!("`{name}` has no matrix to extend")))
        }
    })
}

#[derive(Clone, Debug)]
pub struct DaleniusAnalysis {
    /// Output hyper over `X × Z`.
    pub joint: Hyper,
    /// Inners projected onto `X`.
    pub x_hyper: Hyper,
    /// Inners projected onto `Z`: what the run reveals about `Z`.
    pub z_hyper: Hyper,
}

impl DaleniusAnalysis {
    /// No information about `Z` is released.
    pub fn z_unaffected(&self) -> bool {
        self.z_hyper.is_point()
    }
}

/// Runs the extended program at a prior over `X × Z`.
pub fn dalenius_analysis(h: &AbstractHmm, p: &ProductSpace, prior: &Dist) -> Result<DaleniusAnalysis> {
    check_space(&p.xz, prior.space(), "correlated prior")?;
    let joint = extend_hmm(h, p)?.eval(prior)?;
    let x_hyper = joint.push_forward(|d| p.project_x(d).expect("product inner"))?;
    let z_hyper = joint.push_forward(|d| p.project_z(d).expect("product inner"))?;
    Ok(DaleniusAnalysis {
        joint,
        x_hyper,
        z_hyper,
    })
}

/// The single step `(C × Z) ▹ (M × Z)`.
pub fn dalenius_step(c: &ChannelMatrix, m: &MarkovMatrix, p: &ProductSpace, prior: &Dist) -> Result<DaleniusAnalysis> {
    let step = HmmTensor::make_step(c, m)?;
    dalenius_analysis(&AbstractHmm::denote_hmm(step), p, prior)
}

/// Odds of the most likely `z` against the runner-up, or `None` for a point.
pub fn top_odds(d: &Dist) -> Option<(usize, Rat)> {
    let mut ps: Vec<(usize, Rat)> = d.iter().map(|(i, p)| (i, p.clone())).collect();
    ps.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    match ps.as_slice() {
        [(i, p), (_, q), ..] => Some((*i, p / q)),
        _ => None,
    }
}
