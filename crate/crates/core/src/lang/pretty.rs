//! Source printer. Output reparses to the same tree.

use std::fmt::Write;

use super::ast::*;
use crate::rat::Rat;

fn rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn rats(rs: &[Rat]) -> String {
    rs.iter().map(rat).collect::<Vec<_>>().join(" ")
}

pub fn expr(e: &Expr) -> String {
    match e {
        Expr::Name(n) => n.clone(),
        Expr::Index(n, i) => format!("{n}[{i}]"),
        Expr::Not(inner) => match **inner {
            Expr::Choice(..) => format!("-({})", expr(inner)),
            _ => format!("-{}", expr(inner)),
        },
        Expr::Choice(l, p, r) => {
            let left = match **l {
                Expr::Choice(..) => format!("({})", expr(l)),
                _ => expr(l),
            };
            format!("{left} {}<> {}", rat(p), expr(r))
        }
    }
}

fn prior_expr(p: &PriorExpr) -> String {
    match p {
        PriorExpr::Named(n) => n.clone(),
        PriorExpr::Vector(v) => format!("({})", v.iter().map(rat).collect::<Vec<_>>().join(", ")),
        PriorExpr::Map(m) => format!(
            "{{{}}}",
            m.iter()
                .map(|(l, p)| format!("{l}: {}", rat(p)))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    }
}

fn rows(out: &mut String, rows: &[(String, Vec<Rat>)]) {
    for (label, entries) in rows {
        let _ = writeln!(out, "  {label}: {};", rats(entries));
    }
}

fn decl(out: &mut String, d: &Decl) {
    match d {
        Decl::State { kind, var, .. } => {
            let kind = match kind {
                StateKind::Bits(n) => format!("bits {n}"),
                StateKind::Labels(ls) => format!("{{{}}}", ls.join(", ")),
            };
            if var == DEFAULT_VAR {
                let _ = writeln!(out, "state {kind};");
            } else {
                let _ = writeln!(out, "state {kind} {var};");
            }
        }
        Decl::Channel {
            name, cols, rows: rs, ..
        } => {
            let _ = writeln!(out, "channel {name} {{");
            if !cols.is_empty() {
                let _ = writeln!(out, "  cols {};", cols.join(" "));
            }
            rows(out, rs);
            out.push_str("}\n");
        }
        Decl::Markov { name, rows: rs, .. } => {
            let _ = writeln!(out, "markov {name} {{");
            rows(out, rs);
            out.push_str("}\n");
        }
        Decl::Prior { name, value, .. } => match name {
            Some(n) => {
                let _ = writeln!(out, "prior {n} = {};", prior_expr(value));
            }
            None => {
                let _ = writeln!(out, "prior {};", prior_expr(value));
            }
        },
    }
}

fn stmt(out: &mut String, s: &Stmt, indent: usize) {
    let pad = "  ".repeat(indent);
    match s {
        Stmt::Reveal { expr: e, .. } => {
            let _ = writeln!(out, "{pad}reveal {};", expr(e));
        }
        Stmt::Update { target, .. } => match target {
            UpdateTarget::Markov(m) => {
                let _ = writeln!(out, "{pad}update {m};");
            }
            UpdateTarget::Assign { var, expr: e } => {
                let _ = writeln!(out, "{pad}update {var} := {};", expr(e));
            }
        },
        Stmt::Step { channel, markov, .. } => {
            let _ = writeln!(out, "{pad}step {channel} {markov};");
        }
        Stmt::Repeat { count, body, .. } => {
            let _ = writeln!(out, "{pad}repeat {count} {{");
            for s in body {
                stmt(out, s, indent + 1);
            }
            let _ = writeln!(out, "{pad}}}");
        }
        Stmt::Skip { .. } => {
            let _ = writeln!(out, "{pad}skip;");
        }
    }
}

pub fn program(p: &Program) -> String {
    let mut out = String::new();
    for d in &p.decls {
        decl(&mut out, d);
    }
    for s in &p.body {
        stmt(&mut out, s, 0);
    }
    out
}
