use std::process::{Command, Output};

use isodescent::descent::{CurveSpec, Direction, PlaceVerdict};
use isodescent::localfield::{SearchPolicy, Verdict};
use isodescent::qfield::QuadField;
use isodescent::verify::explain;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isodescent"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn curve(d: i64, p: u64, eps: i64) -> CurveSpec {
    CurveSpec::new(QuadField::new(d).unwrap(), p, eps).unwrap()
}

#[test]
fn explain_minus_two_for_a_45() {
    // 101 ≡ 45 (mod 56)
    let ex = explain(&curve(-7, 101, 1), Direction::Phi, "-2", &SearchPolicy::default()).unwrap();
    assert!(ex.report.member);
    let labels: Vec<&str> = ex
        .report
        .verdicts
        .iter()
        .filter(|(_, v)| matches!(v, PlaceVerdict::Local(Verdict::Solvable(c)) if c.verify()))
        .map(|(l, _)| l.as_str())
        .collect();
    assert_eq!(labels, ["pi2", "pibar2", "p", "q"]);
}

#[test]
fn explain_minus_one_for_c() {
    let ex = explain(&curve(-2, 5, 1), Direction::Phi, "-1", &SearchPolicy::default()).unwrap();
    assert!(!ex.report.member);
    let (label, v) = &ex.report.verdicts[0];
    assert_eq!(label, "pi2");
    assert!(matches!(v, PlaceVerdict::Local(Verdict::Insolvable { .. })));
}

#[test]
fn explain_trivial_class() {
    for (d, p) in [(-1, 5), (-43, 3), (-163, 11)] {
        let ex = explain(&curve(d, p, -1), Direction::PhiHat, "1", &SearchPolicy::default()).unwrap();
        assert!(ex.report.member && ex.report.known_member);
        assert!(ex.report.certificates().all(|c| c.is_exact() && c.verify()));
    }
}

#[test]
fn explain_cli_text_and_json() {
    let out = run(&["explain", "--field", "-7", "--p", "101", "--eps", "+1", "--d", "-2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("member"), "{text}");
    let out = run(&["explain", "--field", "-2", "--p", "5", "--eps", "+1", "--d", "-1", "--json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["member"], false);
    assert_eq!(v["places"][0]["place"], "pi2");
    assert_eq!(v["places"][0]["verdict"], "insolvable");
}

#[test]
fn unknown_class_lists_generators() {
    let out = run(&["explain", "--field", "-7", "--p", "3", "--eps", "-1", "--d", "mu"]);
    assert_eq!(out.status.code(), Some(4));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("-1, pi2, pibar2, p, q"), "{err}");
}

#[test]
fn usage_errors_exit_with_4() {
    assert_eq!(run(&["sweep"]).status.code(), Some(4));
    assert_eq!(run(&["descent", "--field", "-5", "--p", "3", "--eps", "1"]).status.code(), Some(4));
    assert_eq!(run(&["descent", "--field", "-1", "--p", "7", "--eps", "1"]).status.code(), Some(4));
    assert_eq!(run(&["descent", "--field", "-1", "--p", "5", "--eps", "2"]).status.code(), Some(4));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn small_sweep_tsv() {
    let out = run(&["sweep", "--pmax", "7", "--fields", "-1", "--eps", "+1", "--format", "tsv", "--height", "300"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# schema_version="));
    assert_eq!(lines.len(), 4);
    assert!(lines[3].starts_with("-1\t+1\t5\t7\tD\t5 mod 8\t0\t2\t0\t2\t0\t0\t0\ttrue"), "{}", lines[3]);
}

#[test]
fn descent_prints_both_groups() {
    let out = run(&["descent", "--field", "-3", "--p", "17", "--eps", "-1", "--height", "500"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("S^(phi): dim 1"), "{text}");
    assert!(text.contains("S^(phihat): dim 4"), "{text}");
    assert!(text.contains("-> match"), "{text}");
}
