//! Command-line front end.
//!
//! Exit codes: 0 success, 1 `NOT-REFINES`, 2 usage, parse or elaboration
//! errors, 3 state-space mismatches.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::dalenius::{copy_space, dalenius_analysis, perfectly_correlated, top_odds, ProductSpace};
use crate::dist::{Dist, Hyper, Space};
use crate::error::Error;
use crate::formats::{
    hyper_json, parse_correlated, parse_loss, parse_matrix, render_hyper, render_loss, render_refinement, Style,
};
use crate::lang::{self, parse_prior_expr, Elaborated};
use crate::random;
use crate::rat::{format_decimal, Rat};
use crate::refinement::{check_refinement, RefinementResult};
use crate::semantics::AbstractHmm;
use crate::uncertainty::{leakage, wp_exact, wp_loss, UncertaintyMeasure, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_REFINES: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "hyperflow",
    version,
    about = "Exact hyper-distribution analysis of hidden-state programs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone, Copy)]
struct Render {
    /// Print exact fractions (default).
    #[arg(long, conflicts_with = "dec")]
    frac: bool,
    /// Print decimals rounded half-even to DIGITS places.
    #[arg(long, value_name = "DIGITS", num_args = 0..=1, default_missing_value = "4")]
    dec: Option<usize>,
}

impl Render {
    fn style(self) -> Style {
        match self.dec {
            Some(d) => Style::Dec(d),
            None => Style::Frac,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Print the output hyper of a program.
    Run {
        program: PathBuf,
        /// Prior name or literal, e.g. `skewed` or `(0, 1/3, 1/3, 1/3)`.
        #[arg(long)]
        prior: Option<String>,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        render: Render,
    },
    /// Report prior and posterior uncertainty and their difference.
    Leakage {
        program: PathBuf,
        #[arg(long)]
        prior: Option<String>,
        /// `shannon`, `bayes`, `guessing` or `loss:<file>`.
        #[arg(long, default_value = "shannon")]
        measure: String,
        #[command(flatten)]
        render: Render,
    },
    /// Decide whether IMP refines SPEC, i.e. leaks no more.
    Refine {
        /// Program or matrix file.
        spec: PathBuf,
        /// Program or matrix file.
        imp: PathBuf,
        #[arg(long)]
        prior: Option<String>,
        /// Also compare at this many random priors.
        #[arg(long, value_name = "K")]
        random_priors: Option<usize>,
        /// Write the refinement matrix or separating loss here.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Expected loss after the program, or the loss to apply before it.
    Wp {
        program: PathBuf,
        #[arg(long)]
        loss: PathBuf,
        #[arg(long, conflicts_with = "emit_pre_loss")]
        prior: Option<String>,
        /// Print the pre-loss function instead of a value.
        #[arg(long)]
        emit_pre_loss: bool,
        #[command(flatten)]
        render: Render,
    },
    /// What the program reveals about data correlated with its initial state.
    Dalenius {
        program: PathBuf,
        /// Prior over `X × Z`; by default `Z` is a copy of the initial state.
        #[arg(long)]
        corr: Option<PathBuf>,
        #[arg(long, conflicts_with = "corr")]
        prior: Option<String>,
        #[command(flatten)]
        render: Render,
    },
}

/// A command failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::SpaceMismatch(_)
            | Error::DimensionMismatch(_)
            | Error::IndexMismatch(_)
            | Error::NotMaterialized(_) => EXIT_MISMATCH,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn in_file(path: &Path) -> impl Fn(Error) -> Failure + '_ {
    move |e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_USAGE,
        message: format!("{}: {e}", path.display()),
    })
}

fn write_out(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure {
        code: EXIT_USAGE,
        message: format!("{}: {e}", path.display()),
    })
}

fn load(path: &Path) -> Result<Elaborated, Failure> {
    lang::load(&read(path)?).map_err(in_file(path))
}

fn prior_for(e: &Elaborated, prior: &Option<String>) -> Result<Dist, Failure> {
    match prior {
        None => Ok(e.prior.clone()),
        Some(text) => {
            let expr = parse_prior_expr(text).map_err(|p| Failure {
                code: EXIT_USAGE,
                message: format!("--prior: {p}"),
            })?;
            e.resolve_prior(&expr).map_err(|err| Failure {
                code: EXIT_USAGE,
                message: format!("--prior: {err}"),
            })
        }
    }
}

fn show(v: &Value, style: Style) -> String {
    match v {
        Value::Exact(r) => style.show(r),
        Value::Approx(x) => format!("{x:.4}"),
    }
}

/// Dispatches `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match dispatch(cli.cmd, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cmd: Cmd, out: &mut dyn Write) -> Result<i32, Failure> {
    let mut text: String;
    let code = match cmd {
        Cmd::Run {
            program,
            prior,
            json,
            render,
        } => {
            let e = load(&program)?;
            let prior = prior_for(&e, &prior)?;
            let h = e.hmm.eval(&prior)?;
            if json {
                text = serde_json::to_string_pretty(&hyper_json(&h)).expect("json") + "\n";
            } else {
                text = render_hyper(&h, render.style());
            }
            EXIT_OK
        }
        Cmd::Leakage {
            program,
            prior,
            measure,
            render,
        } => {
            let e = load(&program)?;
            let prior = prior_for(&e, &prior)?;
            text = leakage_report(&e, &prior, &measure, render.style())?;
            EXIT_OK
        }
        Cmd::Refine {
            spec,
            imp,
            prior,
            random_priors,
            out: dest,
        } => {
            let (code, report, file) = refine(&spec, &imp, &prior, random_priors)?;
            text = report;
            if let Some(file) = file {
                match dest {
                    Some(path) => {
                        write_out(&path, &file)?;
                        text.push_str(&format!("written to {}\n", path.display()));
                    }
                    None => text.push_str(&file),
                }
            }
            code
        }
        Cmd::Wp {
            program,
            loss,
            prior,
            emit_pre_loss,
            render,
        } => {
            let e = load(&program)?;
            let l = parse_loss(&read(&loss)?, &e.space).map_err(in_file(&loss))?;
            if emit_pre_loss {
                text = render_loss(&wp_loss(&e.hmm, &l)?, "pre");
            } else {
                let prior = prior_for(&e, &prior)?;
                text = format!("{}\n", render.style().show(&wp_exact(&e.hmm, &l, &prior)?));
            }
            EXIT_OK
        }
        Cmd::Dalenius {
            program,
            corr,
            prior,
            render,
        } => {
            let e = load(&program)?;
            let (ps, joint_prior) = match corr {
                Some(path) => parse_correlated(&read(&path)?, &e.space).map_err(in_file(&path))?,
                None => {
                    let ps = ProductSpace::new(e.space.clone(), copy_space(&e.space)?)?;
                    let px = prior_for(&e, &prior)?;
                    let p = perfectly_correlated(&ps, &px)?;
                    (ps, p)
                }
            };
            text = dalenius_report(&e.hmm, &ps, &joint_prior, render.style())?;
            EXIT_OK
        }
    };
    let _ = out.write_all(text.as_bytes());
    Ok(code)
}

fn leakage_report(e: &Elaborated, prior: &Dist, measure: &str, style: Style) -> Result<String, Failure> {
    let (u, name, vulnerability) = match measure {
        "shannon" => (UncertaintyMeasure::Shannon, "shannon entropy (bits)".to_string(), false),
        "bayes" => (UncertaintyMeasure::BayesRisk, "bayes vulnerability".to_string(), true),
        "guessing" => (UncertaintyMeasure::Guessing, "guessing entropy".to_string(), false),
        other => match other.strip_prefix("loss:") {
            Some(path) => {
                let path = Path::new(path);
                let l = parse_loss(&read(path)?, &e.space).map_err(in_file(path))?;
                (UncertaintyMeasure::Loss(l), format!("loss {}", path.display()), false)
            }
            None => {
                return Err(Failure {
                    code: EXIT_USAGE,
                    message: format!("unknown measure `{other}`"),
                })
            }
        },
    };
    let report = leakage(&e.hmm, prior, &u)?;
    let (before, after) = if vulnerability {
        let flip = |v: &Value| match v {
            Value::Exact(r) => Value::Exact(Rat::from_integer(1.into()) - r),
            Value::Approx(x) => Value::Approx(1.0 - x),
        };
        (flip(&report.prior), flip(&report.posterior))
    } else {
        (report.prior.clone(), report.posterior.clone())
    };
    Ok(format!(
        "measure    {name}\nprior      {}\nposterior  {}\nleakage    {}\n",
        show(&before, style),
        show(&after, style),
        show(&report.leak, style)
    ))
}

/// A refine operand: a program, or a matrix file with the hyper it fixes.
enum Operand {
    Program(Box<Elaborated>),
    Matrix(crate::formats::MatrixFile),
}

fn looks_like_matrix(text: &str) -> bool {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .and_then(|l| l.split_whitespace().next())
        .is_some_and(|w| matches!(w, "kind" | "rows" | "cols"))
}

fn operand(path: &Path) -> Result<Operand, Failure> {
    let text = read(path)?;
    if looks_like_matrix(&text) {
        Ok(Operand::Matrix(parse_matrix(&text).map_err(in_file(path))?))
    } else {
        Ok(Operand::Program(Box::new(lang::load(&text).map_err(in_file(path))?)))
    }
}

impl Operand {
    fn space(&self) -> Result<Space, Failure> {
        match self {
            Operand::Program(e) => Ok(e.space.clone()),
            Operand::Matrix(m) => Ok(m.space()?),
        }
    }

    fn hyper(&self, prior: &Dist) -> Result<Hyper, Failure> {
        match self {
            Operand::Program(e) => Ok(e.hmm.eval(prior)?),
            Operand::Matrix(m) => Ok(m.to_hyper(Some(prior))?),
        }
    }

    fn hmm(&self) -> Option<AbstractHmm> {
        match self {
            Operand::Program(e) => Some(e.hmm.clone()),
            Operand::Matrix(m) => m.to_hmm().ok(),
        }
    }
}

type RefineOutcome = (i32, String, Option<String>);

fn not_refines(
    x: &Hyper,
    y: &Hyper,
    sep: &crate::uncertainty::LossFunction,
    heading: &str,
) -> Result<RefineOutcome, Failure> {
    let report = format!(
        "{heading}\nspec expectation  {}\nimp expectation   {}\n",
        sep.expect_hyper(x)?,
        sep.expect_hyper(y)?
    );
    Ok((EXIT_NOT_REFINES, report, Some(render_loss(sep, "separator"))))
}

fn refine(
    spec: &Path,
    imp: &Path,
    prior: &Option<String>,
    random_priors: Option<usize>,
) -> Result<RefineOutcome, Failure> {
    use crate::formats::MatrixKind;
    let a = operand(spec)?;
    let b = operand(imp)?;
    let is_joint = |o: &Operand| matches!(o, Operand::Matrix(m) if m.kind == MatrixKind::Joint);
    if a.space()? != b.space()? {
        return Err(Failure {
            code: EXIT_MISMATCH,
            message: "state spaces differ".into(),
        });
    }

    let (hs, hi) = if is_joint(&a) || is_joint(&b) {
        if prior.is_some() || random_priors.is_some() {
            return Err(Failure {
                code: EXIT_USAGE,
                message: "joint matrices fix their own prior".into(),
            });
        }
        let own = |o: &Operand, path: &Path| match o {
            Operand::Matrix(m) => m.to_hyper(None).map_err(in_file(path)),
            Operand::Program(e) => Ok(e.hmm.eval(&e.prior)?),
        };
        (own(&a, spec)?, own(&b, imp)?)
    } else {
        let space = a.space()?;
        let p = match (&a, &b) {
            (Operand::Program(e), _) | (_, Operand::Program(e)) => prior_for(e, prior)?,
            _ if prior.is_some() => {
                return Err(Failure {
                    code: EXIT_USAGE,
                    message: "--prior needs a program operand to resolve names".into(),
                })
            }
            _ => Dist::uniform(space.clone()),
        };
        if let Some(k) = random_priors {
            let mut rng = random::from_env();
            let (ha, hb) = (a.hmm().expect("program"), b.hmm().expect("program"));
            for trial in 0..k {
                let q = random::dist(&mut rng, &space);
                let (x, y) = (ha.eval(&q)?, hb.eval(&q)?);
                if let RefinementResult::NotRefines { separator } = check_refinement(&x, &y)? {
                    return not_refines(&x, &y, &separator, &format!("NOT-REFINES at random prior {trial}: {q}"));
                }
            }
        }
        (a.hyper(&p)?, b.hyper(&p)?)
    };

    match check_refinement(&hs, &hi)? {
        RefinementResult::Refines { matrix, .. } => {
            let checked = match random_priors {
                Some(k) => format!(" (and at {k} random priors)"),
                None => String::new(),
            };
            Ok((EXIT_OK, format!("REFINES{checked}\n"), Some(render_refinement(&matrix))))
        }
        RefinementResult::NotRefines { separator } => not_refines(&hs, &hi, &separator, "NOT-REFINES"),
    }
}

fn dalenius_report(h: &AbstractHmm, ps: &ProductSpace, prior: &Dist, style: Style) -> Result<String, Failure> {
    let a = dalenius_analysis(h, ps, prior)?;
    let mut text = String::from("joint hyper over X,Z\n");
    text.push_str(&render_hyper(&a.joint, style));
    text.push_str("\nhyper over Z\n");
    text.push_str(&render_hyper(&a.z_hyper, style));
    text.push('\n');
    if a.z_unaffected() {
        text.push_str("no Dalenius leakage\n");
        return Ok(text);
    }
    for (d, w) in a.z_hyper.iter() {
        let line = match top_odds(d) {
            None => {
                let z = d.support()[0];
                format!("{} certain", ps.z.label(z))
            }
            Some((z, odds)) => format!(
                "odds {}:1 for {}",
                match style {
                    Style::Frac => odds.to_string(),
                    Style::Dec(k) => format_decimal(&odds, k),
                },
                ps.z.label(z)
            ),
        };
        text.push_str(&format!("with probability {}: {line}\n", style.show(w)));
    }
    Ok(text)
}
