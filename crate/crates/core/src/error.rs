use std::fmt;

use crate::rat::Rat;

/// Position in a program source, 1-based.
#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

// Spans never take part in AST equality.
impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Span {}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub span: Span,
    pub message: String,
    pub expected: Vec<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("sub-distribution has zero weight")]
    ZeroWeight,
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("probability {0} is outside [0, 1]")]
    BadProbability(Rat),
    #[error("state-space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("invalid state space: {0}")]
    InvalidSpace(String),
    #[error("not a distribution: {0}")]
    NotADistribution(String),
    #[error("matrix is not stochastic: {0}")]
    NotStochastic(String),
    #[error("not a joint matrix: entries sum to {0}")]
    NotAJoint(Rat),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("witness index mismatch: {0}")]
    IndexMismatch(String),
    #[error("degenerate witness: {0}")]
    DegenerateWitness(String),
    #[error("cannot materialize: {0}")]
    NotMaterialized(String),
    #[error("unsupported state width {0}")]
    UnsupportedWidth(usize),
    #[error("invalid loss function: {0}")]
    InvalidLoss(String),
    #[error("no separating loss function found")]
    NoSeparator,
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("{span}: {message}")]
    Elaboration { span: Span, message: String },
    #[error("{0}")]
    Format(String),
}

impl Error {
    pub(crate) fn elab(span: Span, message: impl Into<String>) -> Self {
        Error::Elaboration {
            span,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
