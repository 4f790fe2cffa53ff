mod common;

use std::path::Path;
use std::process::Command;

use common::*;
use hyperflow::cli::{self, EXIT_MISMATCH, EXIT_NOT_REFINES, EXIT_OK, EXIT_USAGE};
use hyperflow::formats::{parse_loss, parse_matrix, MatrixKind};
use hyperflow::StateSpace;

struct Outcome {
    code: i32,
    out: String,
    err: String,
}

fn hf(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["hyperflow".to_string()];
    for a in args {
        // bare fixture names resolve into tests/data
        if a.contains('.') && !a.starts_with('-') && !a.contains('/') {
            full.push(data(a).display().to_string());
        } else {
            full.push(a.to_string());
        }
    }
    let code = cli::run(full, &mut out, &mut err);
    Outcome {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

#[test]
fn run_json_matches_golden() {
    let o = hf(&["run", "one_bit.hflow", "--json"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    let got: serde_json::Value = serde_json::from_str(&o.out).unwrap();
    let want: serde_json::Value = serde_json::from_str(&read_data("one_bit.golden.json")).unwrap();
    assert_eq!(got, want);
}

#[test]
fn run_prints_groups() {
    let o = hf(&["run", "one_bit.hflow"]);
    assert_eq!(o.code, EXIT_OK);
    let groups: Vec<&str> = o.out.trim_end().split("\n\n").collect();
    assert_eq!(groups.len(), 2);
    assert_eq!(
        groups[1].lines().next().unwrap().split_whitespace().collect::<Vec<_>>(),
        ["00", "1/2", "1/2"]
    );
}

#[test]
fn decimals_round_half_even() {
    // 1/4 sits exactly between 0.2 and 0.3
    let o = hf(&["run", "one_bit.hflow", "--dec", "1"]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o
        .out
        .lines()
        .any(|l| l.split_whitespace().collect::<Vec<_>>() == ["01", "0.2", "0.5"]));
    let o = hf(&["run", "one_bit.hflow", "--dec", "0"]);
    assert!(o
        .out
        .lines()
        .any(|l| l.split_whitespace().collect::<Vec<_>>() == ["11", "0"]));
    let o = hf(&["run", "repeat10_invert.hflow", "--dec"]);
    assert!(o.out.contains("0.499"), "{}", o.out);
}

#[test]
fn prior_override() {
    let o = hf(&["run", "null.hflow", "--prior", "(0, 1/3, 1/3, 1/3)"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    assert!(!o.out.lines().any(|l| l.starts_with("00")));
    assert_eq!(hf(&["run", "null.hflow", "--prior", "(1, 1)"]).code, EXIT_USAGE);
    assert_eq!(hf(&["run", "null.hflow", "--prior", "nosuch"]).code, EXIT_USAGE);
}

#[test]
fn leakage_reports() {
    let o = hf(&["leakage", "skewed_one_bit.hflow", "--measure", "bayes"]);
    assert_eq!(o.code, EXIT_OK);
    assert!(
        o.out.contains("prior      1/3\nposterior  1/3\nleakage    0\n"),
        "{}",
        o.out
    );

    // three equally likely boxes; the drawn colour halves the uncertainty
    let o = hf(&["leakage", "bertrand.hflow", "--measure", "bayes"]);
    assert!(o.out.contains("prior      1/3\nposterior  2/3\n"), "{}", o.out);
    let o = hf(&["leakage", "bertrand.hflow", "--dec"]);
    assert!(o.out.contains("prior      1.5850\n"), "{}", o.out);

    let loss = format!("loss:{}", data("same_or_different.loss").display());
    let o = hf(&["leakage", "one_bit_then_flip.hflow", "--measure", &loss]);
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    assert!(o.out.contains("posterior  1/2\n"));
    assert_eq!(
        hf(&["leakage", "one_bit.hflow", "--measure", "entropy"]).code,
        EXIT_USAGE
    );
}

#[test]
fn refine_joint_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let dest = dir.path().join("r.mat");
    let o = hf(&[
        "refine",
        "coins_spec.joint",
        "coins_imp.joint",
        "-o",
        dest.to_str().unwrap(),
    ]);
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    assert!(o.out.starts_with("REFINES\n"));
    let r = parse_matrix(&std::fs::read_to_string(&dest).unwrap()).unwrap();
    assert_eq!(r.kind, MatrixKind::Channel);
    // Inners in order: spec (1/3,2/3), (2/3,1/3); imp (1/3,2/3), (1/2,1/2),
    // (2/3,1/3). Each spec column keeps 2/3 and sends 1/3 to the even one.
    assert_eq!(
        r.entries,
        vec![vec![r_(2, 3), r_(1, 3), r_(0, 1)], vec![r_(0, 1), r_(1, 3), r_(2, 3)]]
    );
}

fn r_(n: i64, d: i64) -> hyperflow::rat::Rat {
    r(n, d)
}

#[test]
fn refine_reports_a_separator() {
    let o = hf(&["refine", "coins_imp.joint", "coins_spec.joint"]);
    assert_eq!(o.code, EXIT_NOT_REFINES);
    assert!(o.out.starts_with("NOT-REFINES\n"));
    let text = &o.out[o.out.find("loss ").unwrap()..];
    let s = StateSpace::new(["H", "T"]).unwrap();
    let l = parse_loss(text, &s).unwrap();
    // joints as columns, normalized by hand
    let imp = columns_to_hyper(&[vec![r(2, 9), r(1, 9)], vec![r(1, 6), r(1, 6)], vec![r(1, 9), r(2, 9)]]);
    let spec = columns_to_hyper(&[vec![r(1, 3), r(1, 6)], vec![r(1, 6), r(1, 3)]]);
    assert!(loss_expect(l.table(), &imp) > loss_expect(l.table(), &spec));
}

#[test]
fn refine_programs_at_random_priors() {
    let o = hf(&["refine", "one_bit.hflow", "null.hflow", "--random-priors", "5"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    assert!(o.out.starts_with("REFINES (and at 5 random priors)"));
    let o = hf(&["refine", "null.hflow", "one_bit.hflow", "--random-priors", "5"]);
    assert_eq!(o.code, EXIT_NOT_REFINES);
}

#[test]
fn wp_values_and_pre_losses() {
    let loss = data("same_or_different.loss");
    let loss = loss.to_str().unwrap();
    let o = hf(&["wp", "one_bit_then_flip.hflow", "--loss", loss]);
    assert_eq!(o.out, "1/2\n");
    let o = hf(&[
        "wp",
        "one_bit_then_flip.hflow",
        "--loss",
        loss,
        "--prior",
        "(0, 0, 1/2, 1/2)",
    ]);
    assert_eq!(o.out, "1/4\n");
    let o = hf(&["wp", "one_bit_then_flip.hflow", "--loss", loss, "--emit-pre-loss"]);
    let space = StateSpace::bits(2).unwrap();
    let pre = parse_loss(&o.out, &space).unwrap();
    assert_eq!(pre.table().len(), 4);
}

#[test]
fn dalenius_reports() {
    let o = hf(&["dalenius", "leak_then_overwrite.hflow"]);
    assert!(o.out.contains("with probability 1/2: x0 certain"), "{}", o.out);
    let o = hf(&["dalenius", "overwrite.hflow"]);
    assert!(o.out.ends_with("no Dalenius leakage\n"));
    let o = hf(&["dalenius", "leak_step.hflow", "--corr", "copy.corr"]);
    assert!(o.out.contains("with probability 5/8: odds 4:1 for z0"), "{}", o.out);
    assert!(o.out.contains("with probability 3/8: z1 certain"));
    let o = hf(&["dalenius", "leak_step.hflow", "--corr", "independent.corr"]);
    assert!(o.out.ends_with("no Dalenius leakage\n"));
}

#[test]
fn errors_map_to_exit_codes() {
    assert_eq!(hf(&["run", "/no/such/file.hflow"]).code, EXIT_USAGE);
    assert_eq!(hf(&["bogus"]).code, EXIT_USAGE);
    let o = hf(&["refine", "one_bit.hflow", "copy.corr"]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(o.err.contains("1:1"), "{}", o.err);
    let o = hf(&["refine", "one_bit.hflow", "leak_step.hflow"]);
    assert_eq!(o.code, EXIT_MISMATCH, "{}", o.err);
    let o = hf(&["wp", "leak_step.hflow", "--loss", "same_or_different.loss"]);
    assert_eq!(o.code, EXIT_MISMATCH, "{}", o.err);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_hyperflow");
    let status = |args: &[&str]| {
        let args: Vec<String> = args
            .iter()
            .map(|a| {
                if Path::new(a).extension().is_some() {
                    data(a).display().to_string()
                } else {
                    a.to_string()
                }
            })
            .collect();
        Command::new(bin).args(&args).output().unwrap().status.code().unwrap()
    };
    assert_eq!(status(&["run", "one_bit.hflow"]), 0);
    assert_eq!(status(&["refine", "coins_imp.joint", "coins_spec.joint"]), 1);
    assert_eq!(status(&["run", "copy.corr"]), 2);
    assert_eq!(status(&["refine", "one_bit.hflow", "leak_step.hflow"]), 3);
    assert_eq!(status(&["--help"]), 0);
}
