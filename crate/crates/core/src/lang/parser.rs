//! Recursive-descent parser with one token of lookahead.

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use crate::error::{ParseError, Span};
use crate::rat::{parse_rat, Rat};

const MAX_DEPTH: usize = 200;

const STMT_START: &[&str] = &["reveal", "leak", "print", "update", "step", "repeat", "skip"];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    depth: usize,
}

type PResult<T> = Result<T, ParseError>;

pub fn parse(src: &str) -> PResult<Program> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        depth: 0,
    };
    p.program()
}

/// Parses a prior given on its own, e.g. on the command line.
pub fn parse_prior_expr(src: &str) -> PResult<PriorExpr> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        depth: 0,
    };
    let e = p.prior_expr()?;
    p.expect(Tok::Eof)?;
    Ok(e)
}

fn is_ident(w: &str) -> bool {
    w.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>, expected: &[&str]) -> PResult<T> {
        Err(ParseError {
            span: self.span(),
            message: message.into(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn unexpected<T>(&self, expected: &[&str]) -> PResult<T> {
        self.error(format!("unexpected {}", self.peek().describe()), expected)
    }

    fn expect(&mut self, tok: Tok) -> PResult<Span> {
        if *self.peek() == tok {
            Ok(self.bump().span)
        } else {
            let want = tok.describe();
            self.unexpected(&[want.as_str()])
        }
    }

    fn eat(&mut self, tok: Tok) -> bool {
        if *self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn peek_word(&self) -> Option<&str> {
        match self.peek() {
            Tok::Word(w) => Some(w),
            _ => None,
        }
    }

    fn word(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Word(w) => {
                self.bump();
                Ok(w)
            }
            _ => self.unexpected(&[what]),
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Word(w) if is_ident(&w) => {
                self.bump();
                Ok(w)
            }
            _ => self.unexpected(&[what]),
        }
    }

    fn count(&mut self, what: &str) -> PResult<usize> {
        let span = self.span();
        let w = self.word(what)?;
        w.parse().map_err(|_| ParseError {
            span,
            message: format!("`{w}` is not a count"),
            expected: vec![what.to_string()],
        })
    }

    fn rational(&mut self) -> PResult<Rat> {
        let span = self.span();
        let numer = self.word("number")?;
        let text = if self.eat(Tok::Slash) {
            let denom = self.word("denominator")?;
            format!("{numer}/{denom}")
        } else {
            numer
        };
        parse_rat(&text).ok_or_else(|| ParseError {
            span,
            message: format!("`{text}` is not a rational number"),
            expected: vec!["number".into()],
        })
    }

    fn starts_rational(&self) -> bool {
        self.peek_word()
            .is_some_and(|w| w.chars().next().is_some_and(|c| c.is_ascii_digit()))
    }

    fn program(&mut self) -> PResult<Program> {
        let mut decls = Vec::new();
        let mut body = Vec::new();
        loop {
            let span = self.span();
            match self.peek_word() {
                None if *self.peek() == Tok::Eof => break,
                Some("state") => decls.push(self.state_decl(span)?),
                Some("channel") => decls.push(self.channel_decl(span)?),
                Some("markov") => decls.push(self.markov_decl(span)?),
                Some("prior") => decls.push(self.prior_decl(span)?),
                Some(w) if STMT_START.contains(&w) => body.push(self.stmt()?),
                _ => {
                    return self.unexpected(&[
                        "state", "channel", "markov", "prior", "reveal", "update", "step", "repeat", "skip",
                    ])
                }
            }
        }
        Ok(Program { decls, body })
    }

    fn state_decl(&mut self, span: Span) -> PResult<Decl> {
        self.bump();
        let kind = if self.peek_word() == Some("bits") {
            self.bump();
            StateKind::Bits(self.count("state width")?)
        } else if self.eat(Tok::LBrace) {
            let mut labels = vec![self.word("state label")?];
            while self.eat(Tok::Comma) {
                labels.push(self.word("state label")?);
            }
            self.expect(Tok::RBrace)?;
            StateKind::Labels(labels)
        } else {
            return self.unexpected(&["bits", "`{`"]);
        };
        let var = match self.peek_word() {
            Some(w) if is_ident(w) => self.ident("state name")?,
            _ => DEFAULT_VAR.to_string(),
        };
        self.expect(Tok::Semi)?;
        Ok(Decl::State { kind, var, span })
    }

    fn rows(&mut self) -> PResult<Vec<(String, Vec<Rat>)>> {
        let mut rows = Vec::new();
        while *self.peek() != Tok::RBrace {
            let label = self.word("row label")?;
            self.expect(Tok::Colon)?;
            let mut entries = Vec::new();
            while self.starts_rational() {
                entries.push(self.rational()?);
            }
            if entries.is_empty() {
                return self.unexpected(&["number"]);
            }
            self.expect(Tok::Semi)?;
            rows.push((label, entries));
        }
        Ok(rows)
    }

    fn channel_decl(&mut self, span: Span) -> PResult<Decl> {
        self.bump();
        let name = self.ident("channel name")?;
        self.expect(Tok::LBrace)?;
        let mut cols = Vec::new();
        let has_header =
            self.peek_word() == Some("cols") && self.toks.get(self.pos + 1).map(|t| &t.tok) != Some(&Tok::Colon);
        if has_header {
            self.bump();
            while let Some(w) = self.peek_word() {
                cols.push(w.to_string());
                self.bump();
            }
            if cols.is_empty() {
                return self.unexpected(&["column label"]);
            }
            self.expect(Tok::Semi)?;
        }
        let rows = self.rows()?;
        self.expect(Tok::RBrace)?;
        Ok(Decl::Channel { name, cols, rows, span })
    }

    fn markov_decl(&mut self, span: Span) -> PResult<Decl> {
        self.bump();
        let name = self.ident("markov name")?;
        self.expect(Tok::LBrace)?;
        let rows = self.rows()?;
        self.expect(Tok::RBrace)?;
        Ok(Decl::Markov { name, rows, span })
    }

    fn prior_decl(&mut self, span: Span) -> PResult<Decl> {
        self.bump();
        let named = match (self.peek_word(), self.toks.get(self.pos + 1).map(|t| &t.tok)) {
            (Some(w), Some(Tok::Equals)) if is_ident(w) => {
                let n = self.ident("prior name")?;
                self.bump();
                Some(n)
            }
            _ => None,
        };
        let value = self.prior_expr()?;
        self.expect(Tok::Semi)?;
        Ok(Decl::Prior {
            name: named,
            value,
            span,
        })
    }

    fn prior_expr(&mut self) -> PResult<PriorExpr> {
        if self.eat(Tok::LParen) {
            let mut v = vec![self.rational()?];
            while self.eat(Tok::Comma) {
                v.push(self.rational()?);
            }
            self.expect(Tok::RParen)?;
            Ok(PriorExpr::Vector(v))
        } else if self.eat(Tok::LBrace) {
            let mut m = Vec::new();
            loop {
                let label = self.word("state label")?;
                self.expect(Tok::Colon)?;
                m.push((label, self.rational()?));
                if !self.eat(Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RBrace)?;
            Ok(PriorExpr::Map(m))
        } else {
            match self.peek_word() {
                Some(w) if is_ident(w) => Ok(PriorExpr::Named(self.ident("prior name")?)),
                _ => self.unexpected(&["prior name", "`(`", "`{`"]),
            }
        }
    }

    fn block(&mut self) -> PResult<Vec<Stmt>> {
        let close = if self.eat(Tok::LBrace) {
            Tok::RBrace
        } else if self.eat(Tok::LParen) {
            Tok::RParen
        } else {
            return self.unexpected(&["`{`", "`(`"]);
        };
        let mut body = Vec::new();
        while *self.peek() != close {
            body.push(self.stmt()?);
        }
        self.bump();
        Ok(body)
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return self.error("nesting too deep", &[]);
        }
        let span = self.span();
        let kw = self.word("statement")?;
        let stmt = match kw.as_str() {
            "reveal" | "leak" | "print" => Stmt::Reveal {
                expr: self.expr()?,
                span,
            },
            "update" => {
                let name = self.ident("markov or state name")?;
                let target = if self.eat(Tok::Assign) {
                    UpdateTarget::Assign {
                        var: name,
                        expr: self.expr()?,
                    }
                } else {
                    UpdateTarget::Markov(name)
                };
                Stmt::Update { target, span }
            }
            "step" => {
                let channel = self.ident("channel name")?;
                let markov = self.ident("markov name")?;
                Stmt::Step { channel, markov, span }
            }
            "repeat" => {
                let count = self.count("repeat count")?;
                let body = self.block()?;
                Stmt::Repeat { count, body, span }
            }
            "skip" => Stmt::Skip { span },
            _ => {
                self.pos -= 1;
                return self.unexpected(STMT_START);
            }
        };
        self.eat(Tok::Semi);
        self.depth -= 1;
        Ok(stmt)
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return self.error("expression too deep", &[]);
        }
        let left = self.unary()?;
        let e = if let Tok::Choice(p) = self.peek().clone() {
            self.bump();
            let right = self.expr()?;
            Expr::Choice(Box::new(left), p, Box::new(right))
        } else {
            left
        };
        self.depth -= 1;
        Ok(e)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat(Tok::Minus) {
            self.depth += 1;
            if self.depth > MAX_DEPTH {
                return self.error("expression too deep", &[]);
            }
            let inner = self.unary()?;
            self.depth -= 1;
            return Ok(Expr::Not(Box::new(inner)));
        }
        if self.eat(Tok::LParen) {
            let e = self.expr()?;
            self.expect(Tok::RParen)?;
            return Ok(e);
        }
        let name = self.word("expression")?;
        if self.eat(Tok::LBracket) {
            let i = self.count("bit index")?;
            self.expect(Tok::RBracket)?;
            return Ok(Expr::Index(name, i));
        }
        Ok(Expr::Name(name))
    }
}
