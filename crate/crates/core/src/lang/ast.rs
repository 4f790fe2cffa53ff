use crate::error::Span;
use crate::rat::Rat;

/// Name given to the state when a declaration does not choose one.
pub const DEFAULT_VAR: &str = "xs";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub decls: Vec<Decl>,
    pub body: Vec<Stmt>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StateKind {
    Bits(usize),
    Labels(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PriorExpr {
    Named(String),
    Vector(Vec<Rat>),
    Map(Vec<(String, Rat)>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decl {
    State {
        kind: StateKind,
        var: String,
        span: Span,
    },
    Channel {
        name: String,
        cols: Vec<String>,
        rows: Vec<(String, Vec<Rat>)>,
        span: Span,
    },
    Markov {
        name: String,
        rows: Vec<(String, Vec<Rat>)>,
        span: Span,
    },
    /// `prior p;` selects the prior; `prior name = p;` only defines one.
    Prior {
        name: Option<String>,
        value: PriorExpr,
        span: Span,
    },
}

/// Probabilistic expression over the state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    /// The state variable, a channel or markov name, or a constant.
    Name(String),
    /// Bit `i` of the state, counting from the leftmost character.
    Index(String, usize),
    /// Bitwise complement.
    Not(Box<Expr>),
    /// `a p<> b`: `a` with probability `p`, otherwise `b`.
    Choice(Box<Expr>, Rat, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UpdateTarget {
    Markov(String),
    Assign { var: String, expr: Expr },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stmt {
    /// `reveal`, `leak` and `print` are synonyms.
    Reveal {
        expr: Expr,
        span: Span,
    },
    Update {
        target: UpdateTarget,
        span: Span,
    },
    Step {
        channel: String,
        markov: String,
        span: Span,
    },
    Repeat {
        count: usize,
        body: Vec<Stmt>,
        span: Span,
    },
    Skip {
        span: Span,
    },
}
