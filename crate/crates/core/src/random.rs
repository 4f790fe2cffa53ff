//! Seeded generators of small random instances, used by the trial-based
//! checks and by `--random-priors`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dist::{Dist, Space};
use crate::matrix::{ChannelMatrix, HmmTensor, MarkovMatrix, ObsLabel};
use crate::rat::Rat;
use crate::uncertainty::LossFunction;

/// Environment variable holding a `u64` seed.
pub const SEED_VAR: &str = "HYPERFLOW_SEED";

pub type TrialRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seeded from `HYPERFLOW_SEED` when set and parseable, otherwise from the
/// operating system.
pub fn from_env() -> TrialRng {
    match std::env::var(SEED_VAR).ok().and_then(|s| s.trim().parse().ok()) {
        Some(seed) => seeded(seed),
        None => ChaCha8Rng::from_entropy(),
    }
}

/// Non-negative integer weights, at least one positive, as a vector.
fn weights(rng: &mut TrialRng, n: usize, max: u32, zero_bias: bool) -> Vec<u32> {
    loop {
        let w: Vec<u32> = (0..n)
            .map(|_| {
                if zero_bias && rng.gen_bool(0.3) {
                    0
                } else {
                    rng.gen_range(0..=max)
                }
            })
            .collect();
        if w.iter().any(|&v| v > 0) {
            return w;
        }
    }
}

fn normalized(w: &[u32]) -> Vec<Rat> {
    let total: u32 = w.iter().sum();
    w.iter().map(|&v| Rat::new(v.into(), total.into())).collect()
}

/// A random distribution with small denominators; some states may get zero.
pub fn dist(rng: &mut TrialRng, space: &Space) -> Dist {
    let w = weights(rng, space.len(), 6, true);
    Dist::from_dense(space.clone(), &normalized(&w)).expect("normalized weights")
}

/// A random distribution with full support.
pub fn full_dist(rng: &mut TrialRng, space: &Space) -> Dist {
    let w: Vec<u32> = (0..space.len()).map(|_| rng.gen_range(1..=6)).collect();
    Dist::from_dense(space.clone(), &normalized(&w)).expect("normalized weights")
}

/// A probability `k/d` with `d <= 6`.
pub fn probability(rng: &mut TrialRng) -> Rat {
    let d: i64 = rng.gen_range(1..=6);
    let k: i64 = rng.gen_range(0..=d);
    Rat::new(k.into(), d.into())
}

fn stochastic_rows(rng: &mut TrialRng, rows: usize, cols: usize) -> Vec<Vec<Rat>> {
    (0..rows).map(|_| normalized(&weights(rng, cols, 4, true))).collect()
}

pub fn obs_labels(n: usize) -> Vec<ObsLabel> {
    (0..n).map(|i| ObsLabel::atom(format!("y{i}"))).collect()
}

pub fn channel(rng: &mut TrialRng, space: &Space, ncols: usize) -> ChannelMatrix {
    ChannelMatrix::new(
        space.clone(),
        obs_labels(ncols),
        stochastic_rows(rng, space.len(), ncols),
    )
    .expect("stochastic rows")
}

pub fn markov(rng: &mut TrialRng, space: &Space) -> MarkovMatrix {
    MarkovMatrix::new(space.clone(), stochastic_rows(rng, space.len(), space.len())).expect("stochastic rows")
}

/// A general tensor: each input state gets one distribution over
/// `(observation, next state)` pairs, so emission and transition may be
/// correlated.
pub fn tensor(rng: &mut TrialRng, space: &Space, nobs: usize) -> HmmTensor {
    let n = space.len();
    let mut data = Vec::with_capacity(n * nobs * n);
    for _ in 0..n {
        data.extend(normalized(&weights(rng, nobs * n, 4, true)));
    }
    HmmTensor::new(space.clone(), obs_labels(nobs), data).expect("stochastic slices")
}

/// A loss function with `nidx` strategies and entries in `0..=4`.
pub fn loss(rng: &mut TrialRng, space: &Space, nidx: usize) -> LossFunction {
    let table = (0..nidx)
        .map(|_| {
            (0..space.len())
                .map(|_| Rat::from_integer(rng.gen_range(0..=4i64).into()))
                .collect()
        })
        .collect();
    let labels = (0..nidx).map(|i| format!("w{i}")).collect();
    LossFunction::new(space.clone(), labels, table).expect("non-negative table")
}
