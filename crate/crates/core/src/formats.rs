//! Text formats for matrices, loss functions and correlated priors, and the
//! renderers for hypers.
//!
//! Every format is line based. Blank lines and `#` comments are ignored, a
//! header line starts with a keyword, and a data line is `label: values...`.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::dalenius::ProductSpace;
use crate::dist::{Dist, Hyper, Space, StateSpace};
use crate::error::{Error, Result};
use crate::matrix::{ChannelMatrix, JointMatrix, MarkovMatrix, ObsLabel};
use crate::rat::{format_decimal, parse_rat, Rat};
use crate::refinement::RefinementMatrix;
use crate::semantics::{abstract_joint, AbstractHmm};
use crate::uncertainty::LossFunction;

fn err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Format(format!("line {line}: {msg}"))
}

/// Non-empty lines with comments removed, numbered from 1.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn data_line(n: usize, l: &str) -> Result<(String, Vec<Rat>)> {
    let (label, rest) = l.split_once(':').ok_or_else(|| err(n, "expected `label: values`"))?;
    let values = rest
        .split_whitespace()
        .map(|t| parse_rat(t).ok_or_else(|| err(n, format!("`{t}` is not a rational"))))
        .collect::<Result<Vec<_>>>()?;
    Ok((label.trim().to_string(), values))
}

fn header<'a>(l: &'a str, kw: &str) -> Option<Vec<&'a str>> {
    let mut words = l.split_whitespace();
    (words.next() == Some(kw) && !l.contains(':')).then(|| words.collect())
}

fn frac(r: &Rat) -> String {
    r.to_string()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixKind {
    /// Entries sum to one overall.
    Joint,
    /// Rows sum to one.
    Channel,
    /// Square and rows sum to one.
    Markov,
}

impl MatrixKind {
    fn name(self) -> &'static str {
        match self {
            MatrixKind::Joint => "joint",
            MatrixKind::Channel => "channel",
            MatrixKind::Markov => "markov",
        }
    }
}

/// A matrix read from a file: `kind` (default `joint`), `rows` and `cols`
/// headers, then one `label: entries` line per row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixFile {
    pub kind: MatrixKind,
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub entries: Vec<Vec<Rat>>,
}

pub fn parse_matrix(text: &str) -> Result<MatrixFile> {
    let mut kind = MatrixKind::Joint;
    let mut rows: Option<Vec<String>> = None;
    let mut cols: Option<Vec<String>> = None;
    let mut data: BTreeMap<String, (usize, Vec<Rat>)> = BTreeMap::new();
    for (n, l) in lines(text) {
        if let Some(w) = header(l, "kind") {
            kind = match w.as_slice() {
                ["joint"] => MatrixKind::Joint,
                ["channel"] => MatrixKind::Channel,
                ["markov"] => MatrixKind::Markov,
                _ => return Err(err(n, "kind must be joint, channel or markov")),
            };
        } else if let Some(w) = header(l, "rows") {
            rows = Some(w.iter().map(|s| s.to_string()).collect());
        } else if let Some(w) = header(l, "cols") {
            cols = Some(w.iter().map(|s| s.to_string()).collect());
        } else {
            let (label, values) = data_line(n, l)?;
            if data.insert(label.clone(), (n, values)).is_some() {
                return Err(err(n, format!("row `{label}` given twice")));
            }
        }
    }
    let rows = rows.ok_or_else(|| Error::Format("missing `rows` header".into()))?;
    let cols = match (kind, cols) {
        (MatrixKind::Markov, None) => rows.clone(),
        (_, Some(c)) => c,
        (_, None) => return Err(Error::Format("missing `cols` header".into())),
    };
    let mut entries = Vec::with_capacity(rows.len());
    for r in &rows {
        let (n, values) = data
            .remove(r)
            .ok_or_else(|| Error::Format(format!("missing row `{r}`")))?;
        if values.len() != cols.len() {
            return Err(err(n, format!("{} entries for {} columns", values.len(), cols.len())));
        }
        entries.push(values);
    }
    if let Some((label, (n, _))) = data.into_iter().next() {
        return Err(err(n, format!("row `{label}` is not in the `rows` header")));
    }
    Ok(MatrixFile {
        kind,
        rows,
        cols,
        entries,
    })
}

impl MatrixFile {
    pub fn space(&self) -> Result<Space> {
        StateSpace::new(self.rows.clone())
    }

    fn obs(&self) -> Vec<ObsLabel> {
        self.cols.iter().map(ObsLabel::atom).collect()
    }

    /// The program this matrix denotes; joints have none.
    pub fn to_hmm(&self) -> Result<AbstractHmm> {
        let space = self.space()?;
        match self.kind {
            MatrixKind::Channel => Ok(AbstractHmm::denote_channel(ChannelMatrix::new(
                space,
                self.obs(),
                self.entries.clone(),
            )?)),
            MatrixKind::Markov => {
                if self.cols != self.rows {
                    return Err(Error::Format("markov columns must equal its rows".into()));
                }
                Ok(AbstractHmm::denote_markov(MarkovMatrix::new(
                    space,
                    self.entries.clone(),
                )?))
            }
            MatrixKind::Joint => Err(Error::Format("a joint matrix is not a program".into())),
        }
    }

    /// The hyper this matrix produces; `prior` defaults to uniform for
    /// channels and markovs and is not allowed for joints.
    pub fn to_hyper(&self, prior: Option<&Dist>) -> Result<Hyper> {
        match self.kind {
            MatrixKind::Joint => {
                if prior.is_some() {
                    return Err(Error::Format("a joint matrix already fixes its prior".into()));
                }
                let j = JointMatrix::new(self.space()?, self.obs(), self.entries.clone())?;
                Ok(abstract_joint(&j))
            }
            _ => {
                let h = self.to_hmm()?;
                let prior = prior.cloned().unwrap_or_else(|| Dist::uniform(h.space().clone()));
                h.eval(&prior)
            }
        }
    }
}

pub fn render_matrix(kind: MatrixKind, rows: &[String], cols: &[String], entries: &[Vec<Rat>]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "kind {}", kind.name());
    let _ = writeln!(out, "rows {}", rows.join(" "));
    if kind != MatrixKind::Markov {
        let _ = writeln!(out, "cols {}", cols.join(" "));
    }
    for (r, row) in rows.iter().zip(entries) {
        let vals: Vec<String> = row.iter().map(frac).collect();
        let _ = writeln!(out, "{r}: {}", vals.join(" "));
    }
    out
}

/// A refinement matrix, with the inners it maps between listed as comments.
pub fn render_refinement(r: &RefinementMatrix) -> String {
    let mut out = String::new();
    for (k, d) in r.rows().iter().enumerate() {
        let _ = writeln!(out, "# s{k} = {d}");
    }
    for (k, d) in r.cols().iter().enumerate() {
        let _ = writeln!(out, "# i{k} = {d}");
    }
    let rows: Vec<String> = (0..r.rows().len()).map(|k| format!("s{k}")).collect();
    let cols: Vec<String> = (0..r.cols().len()).map(|k| format!("i{k}")).collect();
    out.push_str(&render_matrix(MatrixKind::Channel, &rows, &cols, r.entries()));
    out
}

/// Loss file: optional `loss <name>` and `states <labels>` headers, then one
/// `strategy: costs` line per strategy with costs in state order.
pub fn parse_loss(text: &str, space: &Space) -> Result<LossFunction> {
    let mut order: Option<Vec<usize>> = None;
    let mut labels = Vec::new();
    let mut table = Vec::new();
    for (n, l) in lines(text) {
        if header(l, "loss").is_some() {
            continue;
        }
        if let Some(w) = header(l, "states") {
            if w.len() != space.len() {
                return Err(Error::SpaceMismatch(format!(
                    "line {n}: {} states listed, expected {}",
                    w.len(),
                    space.len()
                )));
            }
            let idx = w
                .iter()
                .map(|s| {
                    space
                        .index_of(s)
                        .ok_or_else(|| Error::SpaceMismatch(format!("line {n}: unknown state `{s}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            order = Some(idx);
            continue;
        }
        let (label, values) = data_line(n, l)?;
        if values.len() != space.len() {
            return Err(err(n, format!("{} costs for {} states", values.len(), space.len())));
        }
        let row = match &order {
            Some(idx) => {
                let mut row = vec![Rat::default(); space.len()];
                for (v, &i) in values.into_iter().zip(idx) {
                    row[i] = v;
                }
                row
            }
            None => values,
        };
        labels.push(label);
        table.push(row);
    }
    LossFunction::new(space.clone(), labels, table)
}

pub fn render_loss(l: &LossFunction, name: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "loss {name}");
    let _ = writeln!(out, "states {}", l.space().labels().join(" "));
    for (label, row) in l.labels().iter().zip(l.table()) {
        let vals: Vec<String> = row.iter().map(frac).collect();
        let _ = writeln!(out, "{label}: {}", vals.join(" "));
    }
    out
}

/// Prior over `X × Z`: optional `z <labels>` header, then `x,z: p` lines.
/// Without the header `Z` is every `z` mentioned, in order of appearance.
pub fn parse_correlated(text: &str, x: &Space) -> Result<(ProductSpace, Dist)> {
    let mut zs: Option<Vec<String>> = None;
    let mut entries = Vec::new();
    for (n, l) in lines(text) {
        if let Some(w) = header(l, "z") {
            zs = Some(w.iter().map(|s| s.to_string()).collect());
            continue;
        }
        let (label, values) = data_line(n, l)?;
        let [p] = values.as_slice() else {
            return Err(err(n, "expected one probability"));
        };
        let (xl, zl) = label
            .split_once(',')
            .ok_or_else(|| err(n, format!("`{label}` is not `x,z`")))?;
        let xi = x
            .index_of(xl.trim())
            .ok_or_else(|| err(n, format!("unknown state `{xl}`")))?;
        entries.push((n, xi, zl.trim().to_string(), p.clone()));
    }
    let zs = zs.unwrap_or_else(|| {
        let mut seen: Vec<String> = Vec::new();
        for (_, _, z, _) in &entries {
            if !seen.contains(z) {
                seen.push(z.clone());
            }
        }
        seen
    });
    let z = StateSpace::new(zs)?;
    let ps = ProductSpace::new(x.clone(), z)?;
    let pairs = entries
        .into_iter()
        .map(|(n, xi, zl, p)| {
            let zi = ps.z.index_of(&zl).ok_or_else(|| err(n, format!("unknown z `{zl}`")))?;
            Ok((ps.index(xi, zi), p))
        })
        .collect::<Result<Vec<_>>>()?;
    let prior = Dist::from_pairs(ps.xz.clone(), pairs)?;
    Ok((ps, prior))
}

/// How probabilities are printed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Style {
    Frac,
    /// Rounded half-even to this many digits.
    Dec(usize),
}

impl Style {
    pub fn show(self, r: &Rat) -> String {
        match self {
            Style::Frac => frac(r),
            Style::Dec(d) => format_decimal(r, d),
        }
    }
}

/// One group per inner: its support states with their probabilities, the
/// outer probability on the group's first line, and a blank line between
/// groups.
pub fn render_hyper(h: &Hyper, style: Style) -> String {
    let space = h.space();
    let groups: Vec<(Vec<(String, String)>, String)> = h
        .iter()
        .map(|(d, w)| {
            let rows = d
                .iter()
                .map(|(i, p)| (space.label(i).to_string(), style.show(p)))
                .collect();
            (rows, style.show(w))
        })
        .collect();
    let lw = space.labels().iter().map(String::len).max().unwrap_or(0);
    let pw = groups
        .iter()
        .flat_map(|(rows, _)| rows.iter().map(|(_, p)| p.len()))
        .max()
        .unwrap_or(0);
    let mut out = String::new();
    for (g, (rows, outer)) in groups.iter().enumerate() {
        if g > 0 {
            out.push('\n');
        }
        for (k, (label, p)) in rows.iter().enumerate() {
            if k == 0 {
                let _ = writeln!(out, "{label:<lw$}  {p:<pw$}  {outer}");
            } else {
                let _ = writeln!(out, "{label:<lw$}  {p}");
            }
        }
    }
    out
}

/// `[{"outer": "p/q", "inner": {label: "p/q"}}]` in canonical inner order.
pub fn hyper_json(h: &Hyper) -> serde_json::Value {
    let space = h.space();
    serde_json::Value::Array(
        h.iter()
            .map(|(d, w)| {
                let inner: serde_json::Map<String, serde_json::Value> = d
                    .iter()
                    .map(|(i, p)| (space.label(i).to_string(), frac(p).into()))
                    .collect();
                serde_json::json!({ "outer": frac(w), "inner": inner })
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, rat};

    #[test]
    fn joint_file_to_hyper() {
        let text = "# two observations\nrows a b c\ncols y n\na: 1/6 1/6\nc: 1/3 0\nb: 0 1/3\n";
        let m = parse_matrix(text).unwrap();
        assert_eq!(m.kind, MatrixKind::Joint);
        let h = m.to_hyper(None).unwrap();
        assert_eq!(h.len(), 2);
        assert_eq!(
            h.outer(&Dist::from_dense(h.space().clone(), &[rat(1, 3), int(0), rat(2, 3)]).unwrap()),
            rat(1, 2)
        );
        let again = parse_matrix(&render_matrix(m.kind, &m.rows, &m.cols, &m.entries)).unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn matrix_file_errors() {
        assert!(parse_matrix("cols y\na: 1\n").is_err());
        assert!(parse_matrix("rows a\ncols y\n").is_err());
        assert!(parse_matrix("rows a\ncols y\na: 1\nb: 0\n").is_err());
        assert!(parse_matrix("rows a\ncols y z\na: 1\n").is_err());
        assert!(parse_matrix("rows a\ncols y\na: x\n").is_err());
        let bad = parse_matrix("rows a b\ncols y\na: 1\nb: 1\n").unwrap();
        assert!(matches!(bad.to_hyper(None), Err(Error::NotAJoint(_))));
    }

    #[test]
    fn markov_file() {
        let m = parse_matrix("kind markov\nrows a b\na: 0 1\nb: 1 0\n").unwrap();
        let h = m
            .to_hyper(Some(
                &Dist::from_dense(m.space().unwrap(), &[rat(1, 4), rat(3, 4)]).unwrap(),
            ))
            .unwrap();
        assert_eq!(h.iter().next().unwrap().0.dense(), vec![rat(3, 4), rat(1, 4)]);
    }

    #[test]
    fn loss_file_with_state_order() {
        let space = StateSpace::new(["a", "b"]).unwrap();
        let l = parse_loss("loss test\nstates b a\nw: 1 0\nv: 1/2 1/2\n", &space).unwrap();
        assert_eq!(l.table()[0], vec![int(0), int(1)]);
        let again = parse_loss(&render_loss(&l, "test"), &space).unwrap();
        assert_eq!(again, l);
        assert!(parse_loss("w: 1\n", &space).is_err());
        assert!(parse_loss("w: -1 0\n", &space).is_err());
    }

    #[test]
    fn correlated_prior() {
        let x = StateSpace::new(["x0", "x1"]).unwrap();
        let (ps, p) = parse_correlated("x0,z0: 1/2\nx1,z1: 1/2\n", &x).unwrap();
        assert_eq!(ps.z.labels(), &["z0", "z1"]);
        assert_eq!(p.prob_of("x1,z1").unwrap(), rat(1, 2));
        assert!(parse_correlated("x9,z0: 1\n", &x).is_err());
        assert!(parse_correlated("x0,z0: 1/2\n", &x).is_err());
    }

    #[test]
    fn table_layout() {
        let s = StateSpace::bits(2).unwrap();
        let h = Hyper::from_weighted(
            s.clone(),
            [
                (
                    Dist::from_dense(s.clone(), &[int(0), rat(1, 4), rat(1, 4), rat(1, 2)]).unwrap(),
                    rat(1, 2),
                ),
                (
                    Dist::from_dense(s.clone(), &[rat(1, 2), rat(1, 4), rat(1, 4), int(0)]).unwrap(),
                    rat(1, 2),
                ),
            ],
        )
        .unwrap();
        assert_eq!(
            render_hyper(&h, Style::Dec(4)),
            "01  0.25  0.5\n10  0.25\n11  0.5\n\n00  0.5   0.5\n01  0.25\n10  0.25\n"
        );
        assert!(render_hyper(&h, Style::Frac).starts_with("01  1/4  1/2\n"));
        let json = hyper_json(&h);
        assert_eq!(json[0]["outer"], "1/2");
        assert_eq!(json[1]["inner"]["00"], "1/2");
    }
}
