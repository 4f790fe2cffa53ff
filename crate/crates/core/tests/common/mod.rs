//! Brute-force oracles shared by the integration tests. They work on plain
//! dense vectors and never call the library's own composition code.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use hyperflow::matrix::HmmTensor;
use hyperflow::rat::Rat;
use hyperflow::{Hyper, Space, StateSpace};
use num_traits::Zero;

pub type HyperMap = BTreeMap<Vec<Rat>, Rat>;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn read_data(name: &str) -> String {
    std::fs::read_to_string(data(name)).unwrap()
}

pub fn space(n: usize) -> Space {
    StateSpace::new((0..n).map(|i| format!("s{i}"))).unwrap()
}

pub fn r(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

/// A hyper as dense inner -> outer.
pub fn hyper_map(h: &Hyper) -> HyperMap {
    h.iter().map(|(d, w)| (d.dense(), w.clone())).collect()
}

/// Normalizes each non-zero column and merges equal posteriors.
pub fn columns_to_hyper(columns: &[Vec<Rat>]) -> HyperMap {
    let mut out = HyperMap::new();
    for col in columns {
        let w: Rat = col.iter().cloned().sum();
        if w.is_zero() {
            continue;
        }
        let inner: Vec<Rat> = col.iter().map(|v| v / &w).collect();
        *out.entry(inner).or_insert_with(Rat::zero) += w;
    }
    out
}

/// Output hyper of one tensor, from the defining sum.
pub fn brute_one(t: &HmmTensor, prior: &[Rat]) -> HyperMap {
    let n = prior.len();
    let m = t.obs().len();
    let cols: Vec<Vec<Rat>> = (0..m)
        .map(|y| {
            (0..n)
                .map(|x2| (0..n).map(|x| &prior[x] * t.get(x, y, x2)).sum())
                .collect()
        })
        .collect();
    columns_to_hyper(&cols)
}

/// Output hyper of two tensors run in sequence, observing both outputs.
pub fn brute_seq(t1: &HmmTensor, t2: &HmmTensor, prior: &[Rat]) -> HyperMap {
    let n = prior.len();
    let mut cols = Vec::new();
    for y1 in 0..t1.obs().len() {
        for y2 in 0..t2.obs().len() {
            let col: Vec<Rat> = (0..n)
                .map(|x3| {
                    let mut acc = Rat::zero();
                    for x in 0..n {
                        for x2 in 0..n {
                            acc += &prior[x] * t1.get(x, y1, x2) * t2.get(x2, y2, x3);
                        }
                    }
                    acc
                })
                .collect();
            cols.push(col);
        }
    }
    columns_to_hyper(&cols)
}

/// `min_i Σ_x ρ_x ℓ_i,x`.
pub fn loss_value(table: &[Vec<Rat>], rho: &[Rat]) -> Rat {
    table
        .iter()
        .map(|row| row.iter().zip(rho).map(|(a, b)| a * b).sum::<Rat>())
        .min()
        .unwrap()
}

/// Expected loss value over a hyper.
pub fn loss_expect(table: &[Vec<Rat>], h: &HyperMap) -> Rat {
    h.iter().map(|(d, w)| w * loss_value(table, d)).sum()
}

pub fn mix(a: &[Rat], b: &[Rat], p: &Rat) -> Vec<Rat> {
    let q = Rat::from_integer(1.into()) - p;
    a.iter().zip(b).map(|(x, y)| p * x + &q * y).collect()
}
