//! The program language: `state`, `channel`, `markov` and `prior`
//! declarations followed by `reveal`, `update`, `step` and `repeat` statements.

pub mod ast;
pub mod builtins;
pub mod elaborate;
pub mod lexer;
pub mod parser;
pub mod pretty;

pub use ast::Program;
pub use builtins::builtin_matrices;
pub use elaborate::{elaborate, Elaborated};
pub use parser::{parse, parse_prior_expr};

use crate::dist::Dist;
use crate::error::Result;
use crate::semantics::AbstractHmm;

/// Parses and elaborates in one go.
pub fn load(src: &str) -> Result<Elaborated> {
    elaborate(&parse(src)?)
}

/// The program's denotation together with its selected prior.
pub fn compile(src: &str) -> Result<(AbstractHmm, Dist)> {
    let e = load(src)?;
    Ok((e.hmm, e.prior))
}
