//! Matrices and priors available without a declaration on a bit-string state.

use num_traits::{One, Zero};

use crate::dist::{Dist, Space, StateSpace};
use crate::error::{Error, Result};
use crate::matrix::{ChannelMatrix, MarkovMatrix, ObsLabel};
use crate::rat::{int, Rat};

/// Widest bit-string state the built-ins are generated for.
pub const MAX_BUILTIN_WIDTH: usize = 8;

pub const CHANNELS: &[&str] = &["oneBit"];
pub const MARKOVS: &[&str] = &["invert"];
pub const PRIORS: &[&str] = &["uniform", "skewed"];

#[derive(Clone, Debug)]
pub struct Builtins {
    pub space: Space,
    pub one_bit: ChannelMatrix,
    pub invert: MarkovMatrix,
    pub uniform: Dist,
    pub skewed: Dist,
}

impl Builtins {
    pub fn channel(&self, name: &str) -> Option<&ChannelMatrix> {
        (name == "oneBit").then_some(&self.one_bit)
    }

    pub fn markov(&self, name: &str) -> Option<&MarkovMatrix> {
        (name == "invert").then_some(&self.invert)
    }

    pub fn prior(&self, name: &str) -> Option<&Dist> {
        match name {
            "uniform" => Some(&self.uniform),
            "skewed" => Some(&self.skewed),
            _ => None,
        }
    }
}

fn complement(label: &str) -> String {
    label.chars().map(|c| if c == '0' { '1' } else { '0' }).collect()
}

/// Built-ins for an `n`-bit state.
///
/// * `oneBit` reveals one bit chosen uniformly at random.
/// * `invert` leaves the state alone or flips every bit, each with probability 1/2.
/// * `uniform` is the flat prior and `skewed` is flat on every state but all-zeros.
pub fn builtin_matrices(width: usize) -> Result<Builtins> {
    if width == 0 || width > MAX_BUILTIN_WIDTH {
        return Err(Error::UnsupportedWidth(width));
    }
    let space = StateSpace::bits(width)?;
    let n = space.len();
    let w = int(width as i64);

    let one_bit_rows = space
        .labels()
        .iter()
        .map(|x| {
            let ones = x.chars().filter(|&c| c == '1').count() as i64;
            vec![(&w - int(ones)) / &w, int(ones) / &w]
        })
        .collect();
    let one_bit = ChannelMatrix::new(
        space.clone(),
        vec![ObsLabel::atom("0"), ObsLabel::atom("1")],
        one_bit_rows,
    )?;

    let half = Rat::new(1.into(), 2.into());
    let invert_rows = space
        .labels()
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let flip = space.index_of(&complement(x)).expect("complement is a state");
            let mut row = vec![Rat::zero(); n];
            row[i] += &half;
            row[flip] += &half;
            row
        })
        .collect();
    let invert = MarkovMatrix::new(space.clone(), invert_rows)?;

    let uniform = Dist::uniform(space.clone());
    let q = Rat::one() / int(n as i64 - 1);
    let skewed = Dist::from_pairs(space.clone(), (1..n).map(|i| (i, q.clone())))?;

    Ok(Builtins {
        space,
        one_bit,
        invert,
        uniform,
        skewed,
    })
}
