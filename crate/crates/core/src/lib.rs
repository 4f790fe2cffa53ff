//! Exact semantics for straight-line probabilistic programs over a hidden
//! state: output hypers, leakage, refinement and `wp`-style transformers.
//!
//! ```
//! use hyperflow::lang;
//!
//! let src = "state bits 2;\nprior uniform;\nreveal oneBit;\n";
//! let (prog, prior) = lang::compile(src).unwrap();
//! let hyper = prog.eval(&prior).unwrap();
//! assert_eq!(hyper.len(), 2);
//! ```

pub mod cli;
pub mod dalenius;
pub mod dist;
pub mod error;
pub mod formats;
pub mod lang;
pub mod lp;
pub mod matrix;
pub mod random;
pub mod rat;
pub mod refinement;
pub mod semantics;
pub mod uncertainty;

pub use dist::{Dist, Hyper, Space, StateSpace, SubDist, SubHyper};
pub use error::{Error, Result};
pub use matrix::{ChannelMatrix, HmmTensor, JointMatrix, MarkovMatrix, ObsLabel};
pub use rat::Rat;
pub use semantics::AbstractHmm;
