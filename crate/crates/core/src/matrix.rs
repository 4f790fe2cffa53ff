//! Channels, markovs, HMM tensors and joint matrices.
//!
//! Every constructor validates its input exactly. Nothing is renormalised:
//! a row that sums to `99/100` is an error, not a rounding problem.

use std::collections::HashSet;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::dist::{check_space, Dist, Space, SubDist};
use crate::error::{Error, Result};
use crate::rat::Rat;

/// Observation label. Composition pairs labels instead of concatenating
/// strings, so `(a,(b,c))` and `((a,b),c)` stay distinct until flattened.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObsLabel {
    Atom(String),
    Pair(Box<ObsLabel>, Box<ObsLabel>),
}

/// Label of the single column of the null channel.
pub const NULL_OBS: &str = "•";

impl ObsLabel {
    pub fn atom(s: impl Into<String>) -> Self {
        ObsLabel::Atom(s.into())
    }

    pub fn pair(a: ObsLabel, b: ObsLabel) -> Self {
        ObsLabel::Pair(Box::new(a), Box::new(b))
    }

    /// Leaves in left-to-right order.
    pub fn flatten(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut Vec<String>) {
        match self {
            ObsLabel::Atom(s) => out.push(s.clone()),
            ObsLabel::Pair(a, b) => {
                a.collect(out);
                b.collect(out);
            }
        }
    }
}

impl fmt::Display for ObsLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObsLabel::Atom(s) => write!(f, "{s}"),
            ObsLabel::Pair(a, b) => write!(f, "({a},{b})"),
        }
    }
}

fn check_unique(cols: &[ObsLabel]) -> Result<()> {
    let mut seen = HashSet::new();
    for c in cols {
        if !seen.insert(c) {
            return Err(Error::DimensionMismatch(format!("duplicate column `{c}`")));
        }
    }
    if cols.is_empty() {
        return Err(Error::DimensionMismatch("no columns".into()));
    }
    Ok(())
}

fn check_rows(what: &str, rows: &Space, ncols: usize, entries: &[Vec<Rat>]) -> Result<()> {
    if entries.len() != rows.len() {
        return Err(Error::DimensionMismatch(format!(
            "{what}: {} rows for {} states",
            entries.len(),
            rows.len()
        )));
    }
    for (x, row) in entries.iter().enumerate() {
        if row.len() != ncols {
            return Err(Error::DimensionMismatch(format!(
                "{what}: row `{}` has {} entries, expected {ncols}",
                rows.label(x),
                row.len()
            )));
        }
        if let Some(bad) = row.iter().find(|p| p.is_negative()) {
            return Err(Error::NotStochastic(format!(
                "{what}: negative entry {bad} in row `{}`",
                rows.label(x)
            )));
        }
        let total: Rat = row.iter().sum();
        if !total.is_one() {
            return Err(Error::NotStochastic(format!(
                "{what}: row `{}` sums to {total}",
                rows.label(x)
            )));
        }
    }
    Ok(())
}

/// Row-stochastic matrix from states to observations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChannelMatrix {
    rows: Space,
    cols: Vec<ObsLabel>,
    entries: Vec<Vec<Rat>>,
}

impl ChannelMatrix {
    pub fn new(rows: Space, cols: Vec<ObsLabel>, entries: Vec<Vec<Rat>>) -> Result<Self> {
        check_unique(&cols)?;
        check_rows("channel", &rows, cols.len(), &entries)?;
        Ok(ChannelMatrix { rows, cols, entries })
    }

    /// The channel that reveals nothing.
    pub fn null(rows: Space) -> Self {
        let entries = vec![vec![Rat::one()]; rows.len()];
        ChannelMatrix {
            rows,
            cols: vec![ObsLabel::atom(NULL_OBS)],
            entries,
        }
    }

    /// The channel that reveals the state.
    pub fn identity(rows: Space) -> Self {
        let n = rows.len();
        let cols = rows.labels().iter().map(ObsLabel::atom).collect();
        let entries = (0..n)
            .map(|x| (0..n).map(|y| if x == y { Rat::one() } else { Rat::zero() }).collect())
            .collect();
        ChannelMatrix { rows, cols, entries }
    }

    pub fn rows(&self) -> &Space {
        &self.rows
    }

    pub fn cols(&self) -> &[ObsLabel] {
        &self.cols
    }

    pub fn entry(&self, x: usize, y: usize) -> &Rat {
        &self.entries[x][y]
    }

    pub fn entries(&self) -> &[Vec<Rat>] {
        &self.entries
    }

    /// `(π ▹ C)[x][y] = π[x] * C[x][y]`.
    pub fn apply_prior(&self, prior: &Dist) -> Result<JointMatrix> {
        check_space(&self.rows, prior.space(), "prior vs channel")?;
        let entries = (0..self.rows.len())
            .map(|x| {
                let p = prior.prob(x);
                self.entries[x].iter().map(|c| &p * c).collect()
            })
            .collect();
        Ok(JointMatrix {
            rows: self.rows.clone(),
            cols: self.cols.clone(),
            entries,
        })
    }

    /// Both channels run on the same input; the observation is the pair.
    pub fn parallel(&self, other: &ChannelMatrix) -> Result<ChannelMatrix> {
        check_space(&self.rows, &other.rows, "parallel composition")?;
        let mut cols = Vec::with_capacity(self.cols.len() * other.cols.len());
        for a in &self.cols {
            for b in &other.cols {
                cols.push(ObsLabel::pair(a.clone(), b.clone()));
            }
        }
        let entries = (0..self.rows.len())
            .map(|x| {
                let mut row = Vec::with_capacity(cols.len());
                for p in &self.entries[x] {
                    for q in &other.entries[x] {
                        row.push(p * q);
                    }
                }
                row
            })
            .collect();
        Ok(ChannelMatrix {
            rows: self.rows.clone(),
            cols,
            entries,
        })
    }

    /// Post-processes the observations of `self` through `post`, whose rows
    /// are labelled by the columns of `self`.
    pub fn cascade(&self, post: &ChannelMatrix) -> Result<ChannelMatrix> {
        let ours: Vec<String> = self.cols.iter().map(|c| c.to_string()).collect();
        if ours.as_slice() != post.rows.labels() {
            return Err(Error::SpaceMismatch(format!(
                "cascade: observations [{}] vs rows [{}]",
                ours.join(" "),
                post.rows.labels().join(" ")
            )));
        }
        let entries = mat_mul(&self.entries, &post.entries);
        Ok(ChannelMatrix {
            rows: self.rows.clone(),
            cols: post.cols.clone(),
            entries,
        })
    }
}

pub(crate) fn mat_mul(a: &[Vec<Rat>], b: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let inner = b.len();
    let ncols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..ncols)
                .map(|j| {
                    (0..inner)
                        .filter(|&k| !row[k].is_zero())
                        .fold(Rat::zero(), |acc, k| acc + &row[k] * &b[k][j])
                })
                .collect()
        })
        .collect()
}

/// Row-stochastic square matrix of state transitions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkovMatrix {
    space: Space,
    entries: Vec<Vec<Rat>>,
}

impl MarkovMatrix {
    pub fn new(space: Space, entries: Vec<Vec<Rat>>) -> Result<Self> {
        check_rows("markov", &space, space.len(), &entries)?;
        Ok(MarkovMatrix { space, entries })
    }

    pub fn identity(space: Space) -> Self {
        let n = space.len();
        let entries = (0..n)
            .map(|x| (0..n).map(|y| if x == y { Rat::one() } else { Rat::zero() }).collect())
            .collect();
        MarkovMatrix { space, entries }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn entry(&self, x: usize, x2: usize) -> &Rat {
        &self.entries[x][x2]
    }

    pub fn entries(&self) -> &[Vec<Rat>] {
        &self.entries
    }

    /// `π · M`.
    pub fn apply(&self, prior: &Dist) -> Result<Dist> {
        check_space(&self.space, prior.space(), "prior vs markov")?;
        let pairs = prior.iter().flat_map(|(x, p)| {
            self.entries[x]
                .iter()
                .enumerate()
                .filter(|(_, m)| !m.is_zero())
                .map(move |(x2, m)| (x2, p * m))
        });
        Dist::from_pairs(self.space.clone(), pairs)
    }

    /// `self · other`: first `self`, then `other`.
    pub fn then(&self, other: &MarkovMatrix) -> Result<MarkovMatrix> {
        check_space(&self.space, &other.space, "markov product")?;
        Ok(MarkovMatrix {
            space: self.space.clone(),
            entries: mat_mul(&self.entries, &other.entries),
        })
    }
}

/// `H[x][y][x']`: emit `y` and move from `x` to `x'`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HmmTensor {
    space: Space,
    obs: Vec<ObsLabel>,
    data: Vec<Rat>,
}

impl HmmTensor {
    /// `data` is indexed `[x][y][x']`, flattened row-major.
    pub fn new(space: Space, obs: Vec<ObsLabel>, data: Vec<Rat>) -> Result<Self> {
        check_unique(&obs)?;
        let (n, m) = (space.len(), obs.len());
        if data.len() != n * m * n {
            return Err(Error::DimensionMismatch(format!(
                "tensor has {} entries, expected {}",
                data.len(),
                n * m * n
            )));
        }
        if let Some(bad) = data.iter().find(|p| p.is_negative()) {
            return Err(Error::NotStochastic(format!("negative tensor entry {bad}")));
        }
        for x in 0..n {
            let total: Rat = data[x * m * n..(x + 1) * m * n].iter().sum();
            if !total.is_one() {
                return Err(Error::NotStochastic(format!(
                    "tensor slice `{}` sums to {total}",
                    space.label(x)
                )));
            }
        }
        Ok(HmmTensor { space, obs, data })
    }

    /// `(C ▹ M)[x][y][x'] = C[x][y] * M[x][x']`.
    pub fn make_step(c: &ChannelMatrix, m: &MarkovMatrix) -> Result<Self> {
        check_space(&c.rows, &m.space, "channel vs markov")?;
        let (n, k) = (c.rows.len(), c.cols.len());
        let mut data = Vec::with_capacity(n * k * n);
        for x in 0..n {
            for y in 0..k {
                for x2 in 0..n {
                    data.push(&c.entries[x][y] * &m.entries[x][x2]);
                }
            }
        }
        Ok(HmmTensor {
            space: c.rows.clone(),
            obs: c.cols.clone(),
            data,
        })
    }

    pub fn pure_channel(c: &ChannelMatrix) -> Self {
        Self::make_step(c, &MarkovMatrix::identity(c.rows.clone())).expect("same space")
    }

    pub fn pure_markov(m: &MarkovMatrix) -> Self {
        Self::make_step(&ChannelMatrix::null(m.space.clone()), m).expect("same space")
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn obs(&self) -> &[ObsLabel] {
        &self.obs
    }

    pub fn data(&self) -> &[Rat] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize, x2: usize) -> &Rat {
        let (n, m) = (self.space.len(), self.obs.len());
        &self.data[(x * m + y) * n + x2]
    }

    /// Sequential composition; observations become pairs `(y1,y2)`.
    pub fn compose(&self, other: &HmmTensor) -> Result<HmmTensor> {
        check_space(&self.space, &other.space, "tensor composition")?;
        let n = self.space.len();
        let (m1, m2) = (self.obs.len(), other.obs.len());
        let mut obs = Vec::with_capacity(m1 * m2);
        for a in &self.obs {
            for b in &other.obs {
                obs.push(ObsLabel::pair(a.clone(), b.clone()));
            }
        }
        let mut data = vec![Rat::zero(); n * m1 * m2 * n];
        for x in 0..n {
            for y1 in 0..m1 {
                for mid in 0..n {
                    let h1 = self.get(x, y1, mid);
                    if h1.is_zero() {
                        continue;
                    }
                    for y2 in 0..m2 {
                        for x2 in 0..n {
                            let h2 = other.get(mid, y2, x2);
                            if !h2.is_zero() {
                                data[(x * m1 * m2 + y1 * m2 + y2) * n + x2] += h1 * h2;
                            }
                        }
                    }
                }
            }
        }
        Ok(HmmTensor {
            space: self.space.clone(),
            obs,
            data,
        })
    }

    /// `J[x'][y] = Σ_x π[x] H[x][y][x']`.
    pub fn joint(&self, prior: &Dist) -> Result<JointMatrix> {
        check_space(&self.space, prior.space(), "prior vs tensor")?;
        let (n, m) = (self.space.len(), self.obs.len());
        let mut entries = vec![vec![Rat::zero(); m]; n];
        for (x, p) in prior.iter() {
            for y in 0..m {
                for (x2, row) in entries.iter_mut().enumerate() {
                    let h = self.get(x, y, x2);
                    if !h.is_zero() {
                        row[y] += p * h;
                    }
                }
            }
        }
        Ok(JointMatrix {
            rows: self.space.clone(),
            cols: self.obs.clone(),
            entries,
        })
    }

    /// `Σ_{x'} H[x][y][x']`.
    pub fn channel_marginal(&self) -> Vec<Vec<Rat>> {
        let (n, m) = (self.space.len(), self.obs.len());
        (0..n)
            .map(|x| (0..m).map(|y| (0..n).map(|x2| self.get(x, y, x2)).sum()).collect())
            .collect()
    }

    /// `Σ_y H[x][y][x']`.
    pub fn markov_marginal(&self) -> Vec<Vec<Rat>> {
        let (n, m) = (self.space.len(), self.obs.len());
        (0..n)
            .map(|x| (0..n).map(|x2| (0..m).map(|y| self.get(x, y, x2)).sum()).collect())
            .collect()
    }

    /// True when the tensor factors as some `C ▹ M`, i.e. emission and
    /// transition are independent given the input state.
    pub fn is_single_step(&self) -> bool {
        let (n, m) = (self.space.len(), self.obs.len());
        let c = self.channel_marginal();
        let mm = self.markov_marginal();
        (0..n).all(|x| (0..m).all(|y| (0..n).all(|x2| *self.get(x, y, x2) == &c[x][y] * &mm[x][x2])))
    }

    /// Replaces each observation label by its flattened leaves joined by `.`.
    pub fn flatten_obs(&self) -> HmmTensor {
        HmmTensor {
            space: self.space.clone(),
            obs: self.obs.iter().map(|o| ObsLabel::Atom(o.flatten().join("."))).collect(),
            data: self.data.clone(),
        }
    }

    /// Same numbers in the same column order, labels ignored.
    pub fn same_up_to_relabel(&self, other: &HmmTensor) -> bool {
        self.space == other.space && self.obs.len() == other.obs.len() && self.data == other.data
    }
}

/// Joint distribution of final state (rows) and observation (columns).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointMatrix {
    rows: Space,
    cols: Vec<ObsLabel>,
    entries: Vec<Vec<Rat>>,
}

impl JointMatrix {
    pub fn new(rows: Space, cols: Vec<ObsLabel>, entries: Vec<Vec<Rat>>) -> Result<Self> {
        check_unique(&cols)?;
        if entries.len() != rows.len() || entries.iter().any(|r| r.len() != cols.len()) {
            return Err(Error::DimensionMismatch(format!(
                "joint must be {}x{}",
                rows.len(),
                cols.len()
            )));
        }
        if let Some(bad) = entries.iter().flatten().find(|p| p.is_negative()) {
            return Err(Error::NotADistribution(format!("negative joint entry {bad}")));
        }
        let total: Rat = entries.iter().flatten().sum();
        if !total.is_one() {
            return Err(Error::NotAJoint(total));
        }
        Ok(JointMatrix { rows, cols, entries })
    }

    pub fn rows(&self) -> &Space {
        &self.rows
    }

    pub fn cols(&self) -> &[ObsLabel] {
        &self.cols
    }

    pub fn entries(&self) -> &[Vec<Rat>] {
        &self.entries
    }

    pub fn entry(&self, x: usize, y: usize) -> &Rat {
        &self.entries[x][y]
    }

    pub fn column(&self, y: usize) -> SubDist {
        SubDist::from_pairs(
            self.rows.clone(),
            self.entries.iter().enumerate().map(|(x, r)| (x, r[y].clone())),
        )
        .expect("column of a joint is a sub-distribution")
    }

    /// Row sums.
    pub fn marginal(&self) -> Dist {
        Dist::from_pairs(
            self.rows.clone(),
            self.entries.iter().enumerate().map(|(x, r)| (x, r.iter().sum())),
        )
        .expect("joint sums to one")
    }

    /// `J · R` for a row-stochastic `R` whose rows are indexed by our columns.
    pub fn post_process(&self, r: &[Vec<Rat>], cols: Vec<ObsLabel>) -> Result<JointMatrix> {
        if r.len() != self.cols.len() || r.iter().any(|row| row.len() != cols.len()) {
            return Err(Error::DimensionMismatch(format!(
                "post-processing matrix must be {}x{}",
                self.cols.len(),
                cols.len()
            )));
        }
        JointMatrix::new(self.rows.clone(), cols, mat_mul(&self.entries, r))
    }
}
