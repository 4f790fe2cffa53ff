//! Turns a parsed program into matrices and an abstract HMM.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};

use super::ast::*;
use super::builtins::{self, builtin_matrices, Builtins};
use crate::dist::{Dist, Space, StateSpace};
use crate::error::{Error, Result, Span};
use crate::matrix::{ChannelMatrix, HmmTensor, MarkovMatrix, ObsLabel};
use crate::rat::{is_probability, Rat};
use crate::semantics::AbstractHmm;

/// Largest accepted `repeat` count.
pub const MAX_REPEAT: usize = 4096;

/// Width used when a program declares no state.
pub const DEFAULT_WIDTH: usize = 2;

/// Everything a program defines, plus its denotation.
#[derive(Clone, Debug)]
pub struct Elaborated {
    pub space: Space,
    pub var: String,
    /// Bit width, for bit-string states.
    pub width: Option<usize>,
    pub hmm: AbstractHmm,
    /// Selected prior, uniform when none is given.
    pub prior: Dist,
    pub priors: HashMap<String, Dist>,
    pub channels: HashMap<String, ChannelMatrix>,
    pub markovs: HashMap<String, MarkovMatrix>,
}

struct Env {
    space: Space,
    var: String,
    width: Option<usize>,
    builtins: Option<Result<Builtins>>,
    priors: HashMap<String, Dist>,
    channels: HashMap<String, ChannelMatrix>,
    markovs: HashMap<String, MarkovMatrix>,
}

type Values = BTreeMap<String, Rat>;

fn at(span: Span) -> impl Fn(Error) -> Error {
    move |e| match e {
        e @ Error::Elaboration { .. } => e,
        e @ Error::UnsupportedWidth(_) => e,
        e => Error::elab(span, e.to_string()),
    }
}

fn is_bits(v: &str) -> bool {
    !v.is_empty() && v.chars().all(|c| c == '0' || c == '1')
}

impl Env {
    fn builtins(&mut self) -> Option<Result<&Builtins>> {
        let width = self.width?;
        let b = self.builtins.get_or_insert_with(|| builtin_matrices(width));
        Some(b.as_ref().map_err(Clone::clone))
    }

    fn channel(&mut self, name: &str, span: Span) -> Result<Option<ChannelMatrix>> {
        if let Some(c) = self.channels.get(name) {
            return Ok(Some(c.clone()));
        }
        if builtins::CHANNELS.contains(&name) {
            if let Some(b) = self.builtins() {
                return Ok(b.map_err(at(span))?.channel(name).cloned());
            }
        }
        Ok(None)
    }

    fn markov(&mut self, name: &str, span: Span) -> Result<Option<MarkovMatrix>> {
        if let Some(m) = self.markovs.get(name) {
            return Ok(Some(m.clone()));
        }
        if builtins::MARKOVS.contains(&name) {
            if let Some(b) = self.builtins() {
                return Ok(b.map_err(at(span))?.markov(name).cloned());
            }
        }
        Ok(None)
    }

    fn named_prior(&mut self, name: &str, span: Span) -> Result<Dist> {
        if let Some(p) = self.priors.get(name) {
            return Ok(p.clone());
        }
        if name == "uniform" {
            return Ok(Dist::uniform(self.space.clone()));
        }
        if builtins::PRIORS.contains(&name) {
            if let Some(b) = self.builtins() {
                if let Some(p) = b.map_err(at(span))?.prior(name) {
                    return Ok(p.clone());
                }
            }
        }
        Err(Error::elab(span, format!("unknown prior `{name}`")))
    }

    fn prior(&mut self, p: &PriorExpr, span: Span) -> Result<Dist> {
        match p {
            PriorExpr::Named(n) => self.named_prior(n, span),
            PriorExpr::Vector(v) => {
                if v.len() != self.space.len() {
                    return Err(Error::elab(
                        span,
                        format!("prior has {} entries for {} states", v.len(), self.space.len()),
                    ));
                }
                Dist::from_dense(self.space.clone(), v).map_err(at(span))
            }
            PriorExpr::Map(m) => {
                let pairs = m
                    .iter()
                    .map(|(l, p)| Ok((self.space.require(l)?, p.clone())))
                    .collect::<Result<Vec<_>>>()
                    .map_err(at(span))?;
                Dist::from_pairs(self.space.clone(), pairs).map_err(at(span))
            }
        }
    }

    /// Rows in state order, given rows keyed by state label.
    fn ordered_rows(&self, rows: &[(String, Vec<Rat>)], span: Span) -> Result<Vec<Vec<Rat>>> {
        let mut out: Vec<Option<Vec<Rat>>> = vec![None; self.space.len()];
        for (label, entries) in rows {
            let i = self.space.require(label).map_err(at(span))?;
            if out[i].replace(entries.clone()).is_some() {
                return Err(Error::elab(span, format!("row `{label}` given twice")));
            }
        }
        out.into_iter()
            .enumerate()
            .map(|(i, r)| r.ok_or_else(|| Error::elab(span, format!("missing row `{}`", self.space.label(i)))))
            .collect()
    }

    /// Distribution of the values `e` takes in state `x`.
    fn values(&mut self, e: &Expr, x: usize, span: Span) -> Result<Values> {
        let one = |v: String| Values::from([(v, Rat::one())]);
        match e {
            Expr::Name(n) if *n == self.var => Ok(one(self.space.label(x).to_string())),
            Expr::Name(n) => {
                if let Some(c) = self.channel(n, span)? {
                    return Ok(c
                        .cols()
                        .iter()
                        .zip(&c.entries()[x])
                        .filter(|(_, p)| !p.is_zero())
                        .map(|(y, p)| (y.to_string(), p.clone()))
                        .collect());
                }
                if let Some(m) = self.markov(n, span)? {
                    return Ok(m.entries()[x]
                        .iter()
                        .enumerate()
                        .filter(|(_, p)| !p.is_zero())
                        .map(|(j, p)| (self.space.label(j).to_string(), p.clone()))
                        .collect());
                }
                Ok(one(n.clone()))
            }
            Expr::Index(n, i) => {
                if *n != self.var {
                    return Err(Error::elab(span, format!("`{n}` is not the state")));
                }
                match self.width {
                    Some(w) if *i < w => {
                        let c = self.space.label(x).chars().nth(*i).expect("bit index");
                        Ok(one(c.to_string()))
                    }
                    Some(w) => Err(Error::elab(span, format!("bit {i} out of range for width {w}"))),
                    None => Err(Error::elab(span, "indexing needs a bit-string state")),
                }
            }
            Expr::Not(inner) => {
                let mut out = Values::new();
                for (v, p) in self.values(inner, x, span)? {
                    if !is_bits(&v) {
                        return Err(Error::elab(span, format!("cannot complement `{v}`")));
                    }
                    let flipped = v.chars().map(|c| if c == '0' { '1' } else { '0' }).collect();
                    *out.entry(flipped).or_insert_with(Rat::zero) += p;
                }
                Ok(out)
            }
            Expr::Choice(l, p, r) => {
                if !is_probability(p) {
                    return Err(Error::elab(span, format!("probability {p} outside [0, 1]")));
                }
                let mut out = Values::new();
                for (v, q) in self.values(l, x, span)? {
                    *out.entry(v).or_insert_with(Rat::zero) += q * p;
                }
                let rest = Rat::one() - p;
                for (v, q) in self.values(r, x, span)? {
                    *out.entry(v).or_insert_with(Rat::zero) += q * &rest;
                }
                out.retain(|_, p| !p.is_zero());
                Ok(out)
            }
        }
    }

    fn reveal(&mut self, e: &Expr, span: Span) -> Result<ChannelMatrix> {
        if let Expr::Name(n) = e {
            if let Some(c) = self.channel(n, span)? {
                return Ok(c);
            }
            if self.markov(n, span)?.is_some() {
                return Err(Error::elab(span, format!("`{n}` is a markov; use `update {n}`")));
            }
        }
        let rows = (0..self.space.len())
            .map(|x| self.values(e, x, span))
            .collect::<Result<Vec<_>>>()?;
        let cols: Vec<String> = rows
            .iter()
            .flat_map(|r| r.keys().cloned())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        let entries = rows
            .iter()
            .map(|r| {
                cols.iter()
                    .map(|c| r.get(c).cloned().unwrap_or_else(Rat::zero))
                    .collect()
            })
            .collect();
        ChannelMatrix::new(
            self.space.clone(),
            cols.into_iter().map(ObsLabel::Atom).collect(),
            entries,
        )
        .map_err(at(span))
    }

    fn assign(&mut self, var: &str, e: &Expr, span: Span) -> Result<MarkovMatrix> {
        if var != self.var {
            return Err(Error::elab(span, format!("`{var}` is not the state")));
        }
        let n = self.space.len();
        let mut entries = Vec::with_capacity(n);
        for x in 0..n {
            let mut row = vec![Rat::zero(); n];
            for (v, p) in self.values(e, x, span)? {
                let j = self
                    .space
                    .index_of(&v)
                    .ok_or_else(|| Error::elab(span, format!("`{v}` is not a state")))?;
                row[j] += p;
            }
            entries.push(row);
        }
        MarkovMatrix::new(self.space.clone(), entries).map_err(at(span))
    }

    fn stmts(&mut self, body: &[Stmt]) -> Result<AbstractHmm> {
        let mut acc = AbstractHmm::identity(self.space.clone());
        for s in body {
            acc = acc.then(self.stmt(s)?)?;
        }
        Ok(acc)
    }

    fn stmt(&mut self, s: &Stmt) -> Result<AbstractHmm> {
        match s {
            Stmt::Reveal { expr, span } => Ok(AbstractHmm::denote_channel(self.reveal(expr, *span)?)),
            Stmt::Update { target, span } => match target {
                UpdateTarget::Markov(name) => match self.markov(name, *span)? {
                    Some(m) => Ok(AbstractHmm::denote_markov(m)),
                    None if self.channel(name, *span)?.is_some() => Err(Error::elab(
                        *span,
                        format!("`{name}` is a channel; use `reveal {name}`"),
                    )),
                    None => Err(Error::elab(*span, format!("unknown markov `{name}`"))),
                },
                UpdateTarget::Assign { var, expr } => Ok(AbstractHmm::denote_markov(self.assign(var, expr, *span)?)),
            },
            Stmt::Step { channel, markov, span } => {
                let c = self
                    .channel(channel, *span)?
                    .ok_or_else(|| Error::elab(*span, format!("unknown channel `{channel}`")))?;
                let m = self
                    .markov(markov, *span)?
                    .ok_or_else(|| Error::elab(*span, format!("unknown markov `{markov}`")))?;
                let step = HmmTensor::make_step(&c, &m).map_err(at(*span))?;
                Ok(AbstractHmm::denote_hmm(step))
            }
            Stmt::Repeat { count, body, span } => {
                if *count > MAX_REPEAT {
                    return Err(Error::elab(*span, format!("repeat count {count} exceeds {MAX_REPEAT}")));
                }
                let once = self.stmts(body)?;
                let mut acc = AbstractHmm::identity(self.space.clone());
                for _ in 0..*count {
                    acc = acc.then(once.clone())?;
                }
                Ok(acc)
            }
            Stmt::Skip { .. } => Ok(AbstractHmm::identity(self.space.clone())),
        }
    }
}

fn state(program: &Program) -> Result<(Space, String, Option<usize>)> {
    let mut found = None;
    for d in &program.decls {
        if let Decl::State { kind, var, span } = d {
            if found.is_some() {
                return Err(Error::elab(*span, "state declared twice"));
            }
            let (space, width) = match kind {
                StateKind::Bits(n) => (StateSpace::bits(*n).map_err(at(*span))?, Some(*n)),
                StateKind::Labels(ls) => (StateSpace::new(ls.clone()).map_err(at(*span))?, None),
            };
            found = Some((space, var.clone(), width));
        }
    }
    match found {
        Some(f) => Ok(f),
        None => Ok((
            StateSpace::bits(DEFAULT_WIDTH)?,
            DEFAULT_VAR.to_string(),
            Some(DEFAULT_WIDTH),
        )),
    }
}

pub fn elaborate(program: &Program) -> Result<Elaborated> {
    let (space, var, width) = state(program)?;
    let mut env = Env {
        space: space.clone(),
        var,
        width,
        builtins: None,
        priors: HashMap::new(),
        channels: HashMap::new(),
        markovs: HashMap::new(),
    };
    let mut selected: Option<Dist> = None;
    for d in &program.decls {
        match d {
            Decl::State { .. } => {}
            Decl::Channel { name, cols, rows, span } => {
                let entries = env.ordered_rows(rows, *span)?;
                let width = entries.first().map_or(0, Vec::len);
                let cols: Vec<ObsLabel> = if cols.is_empty() {
                    (0..width).map(|k| ObsLabel::atom(format!("y{k}"))).collect()
                } else {
                    cols.iter().map(ObsLabel::atom).collect()
                };
                let c = ChannelMatrix::new(space.clone(), cols, entries).map_err(at(*span))?;
                if env.channels.insert(name.clone(), c).is_some() || env.markovs.contains_key(name) {
                    return Err(Error::elab(*span, format!("`{name}` defined twice")));
                }
            }
            Decl::Markov { name, rows, span } => {
                let entries = env.ordered_rows(rows, *span)?;
                let m = MarkovMatrix::new(space.clone(), entries).map_err(at(*span))?;
                if env.markovs.insert(name.clone(), m).is_some() || env.channels.contains_key(name) {
                    return Err(Error::elab(*span, format!("`{name}` defined twice")));
                }
            }
            Decl::Prior { name, value, span } => {
                let p = env.prior(value, *span)?;
                match name {
                    Some(n) => {
                        env.priors.insert(n.clone(), p);
                    }
                    None => {
                        if selected.replace(p).is_some() {
                            return Err(Error::elab(*span, "prior selected twice"));
                        }
                    }
                }
            }
        }
    }
    let hmm = env.stmts(&program.body)?;
    Ok(Elaborated {
        prior: selected.unwrap_or_else(|| Dist::uniform(space.clone())),
        space,
        var: env.var,
        width: env.width,
        hmm,
        priors: env.priors,
        channels: env.channels,
        markovs: env.markovs,
    })
}

impl Elaborated {
    /// Resolves a prior written as on the `prior` line, against this program's names.
    pub fn resolve_prior(&self, p: &PriorExpr) -> Result<Dist> {
        let mut env = Env {
            space: self.space.clone(),
            var: self.var.clone(),
            width: self.width,
            builtins: None,
            priors: self.priors.clone(),
            channels: HashMap::new(),
            markovs: HashMap::new(),
        };
        env.prior(p, Span::default())
    }
}
