//! End-to-end runs of the binary: exit codes, report text, and the
//! byte-stability of repeated invocations.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .parent()
        .and_then(Path::parent)
        .expect("crate lives two levels below the workspace root")
        .to_path_buf()
}

fn nlca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlca"))
        .current_dir(workspace_root())
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn code_of(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn check_passes_on_the_sample_files() {
    for file in ["algebras/cur_simple3.alg", "algebras/rank2_ii.alg"] {
        let out = nlca(&["check", file]);
        assert_eq!(code_of(&out), 0, "{file}: {}", stdout_of(&out));
        let text = stdout_of(&out);
        assert!(text.contains("skew: pass"), "{text}");
        assert!(text.contains("filippov: pass"), "{text}");
    }
}

#[test]
fn check_with_the_adjoint_module_reports_module_axioms() {
    let out = nlca(&[
        "check",
        "algebras/cur_simple3.alg",
        "--module",
        "algebras/adjoint.mod",
    ]);
    assert_eq!(code_of(&out), 0);
    let text = stdout_of(&out);
    assert!(text.contains("module-skew: pass"), "{text}");
    assert!(text.contains("module-filippov: pass"), "{text}");
}

#[test]
fn bracket_prints_the_completed_partner_entry() {
    let out = nlca(&["bracket", "algebras/rank2_ii.alg", "--tuple", "e1,e2,e1"]);
    assert_eq!(code_of(&out), 0);
    let text = stdout_of(&out);
    assert!(text.contains("e2"), "{text}");
    assert!(text.contains('d'), "partner entry depends on d: {text}");
}

#[test]
fn bracket_at_indices_uses_the_annihilation_product() {
    let out = nlca(&[
        "bracket",
        "algebras/cur_simple3.alg",
        "--tuple",
        "e1,e2,e3",
        "--indices",
        "1;0;0",
        "-p",
        "1",
    ]);
    assert_eq!(code_of(&out), 0);
    assert!(stdout_of(&out).contains("e4[1]"), "{}", stdout_of(&out));
}

#[test]
fn kprod_extracts_the_constant_coefficient() {
    let out = nlca(&[
        "kprod",
        "algebras/cur_simple3.alg",
        "--tuple",
        "e1,e2,e3",
        "-k",
        "0,0",
    ]);
    assert_eq!(code_of(&out), 0);
    assert!(stdout_of(&out).trim().ends_with("= e4"), "{}", stdout_of(&out));
}

#[test]
fn annihilate_passes_on_the_rank2_sample() {
    let out = nlca(&[
        "annihilate",
        "algebras/rank2_ii.alg",
        "-p",
        "1",
        "--max-degree",
        "2",
    ]);
    assert_eq!(code_of(&out), 0, "{}", stdout_of(&out));
    let text = stdout_of(&out);
    for name in [
        "partial-leibniz: pass",
        "lowering-leibniz: pass",
        "annihilation: pass",
        "reconstruction: pass",
    ] {
        assert!(text.contains(name), "{text}");
    }
}

#[test]
fn cohomology_passes_on_random_and_file_cochains() {
    let out = nlca(&["cohomology", "algebras/rank2_ii.alg", "-q", "1", "--trials", "2"]);
    assert_eq!(code_of(&out), 0, "{}", stdout_of(&out));
    let out = nlca(&[
        "cohomology",
        "algebras/cur_simple3.alg",
        "-q",
        "1",
        "--cochain",
        "algebras/sample_q1.coch",
    ]);
    assert_eq!(code_of(&out), 0, "{}", stdout_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("differential-squared: pass"), "{text}");
    assert!(text.contains("differential-partial: pass"), "{text}");
}

#[test]
fn phi_compares_the_two_differentials() {
    let out = nlca(&[
        "phi",
        "algebras/rank2_ii.alg",
        "-p",
        "1",
        "-q",
        "1",
        "--max-degree",
        "2",
    ]);
    assert_eq!(code_of(&out), 0, "{}", stdout_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("comparison-differential: pass"), "{text}");
    assert!(text.contains("comparison-partial: pass"), "{text}");
}

#[test]
fn plucker_counterexample_pinpoints_the_first_quadruple() {
    let out = nlca(&["plucker", "--size", "4", "--entries", "0,1=1;2,3=1"]);
    assert_eq!(code_of(&out), 1);
    let text = stdout_of(&out);
    assert!(text.contains("plucker: FAIL"), "{text}");
    assert!(
        text.contains("(0,1,2,3): residual 1"),
        "first failing quadruple with unit residual: {text}"
    );
    let spelled = nlca(&["plucker", "--matrix", "4x4", "--entries", "0,1=1;2,3=1"]);
    assert_eq!(code_of(&spelled), 1);
}

#[test]
fn plucker_order_three_always_passes() {
    let out = nlca(&[
        "plucker",
        "--size",
        "3",
        "--entries",
        "0,1=2;0,2=-1/3;1,2=7",
    ]);
    assert_eq!(code_of(&out), 0, "{}", stdout_of(&out));
}

#[test]
fn pseudo_prints_expansion_variables() {
    let out = nlca(&["pseudo", "algebras/rank2_ii.alg"]);
    assert_eq!(code_of(&out), 0);
    let text = stdout_of(&out);
    assert!(text.contains("x1"), "{text}");
    assert!(text.contains("x3"), "{text}");
}

#[test]
fn exit_codes_distinguish_failure_classes() {
    let dir = std::env::temp_dir().join("nlca_cli_exit_codes");
    std::fs::create_dir_all(&dir).expect("temp dir");
    let incomplete = dir.join("incomplete.alg");
    std::fs::write(
        &incomplete,
        "[algebra]\nn = 3\ngenerators = e1, e2\ncomplete = none\n\n[brackets]\n[e1 e1 e2] = l1 - l2\n",
    )
    .expect("write");
    let math = nlca(&["check", incomplete.to_str().expect("utf-8 path")]);
    assert_eq!(code_of(&math), 1, "missing partner entry fails skew");

    let usage = nlca(&["check", "algebras/cur_simple3.alg", "--bogus"]);
    assert_eq!(code_of(&usage), 2);
    let bad_tuple = nlca(&["bracket", "algebras/rank2_ii.alg", "--tuple", "e1,e9,e1"]);
    assert_eq!(code_of(&bad_tuple), 2);

    let missing = nlca(&["check", "no_such_file.alg"]);
    assert_eq!(code_of(&missing), 3);
    let malformed = dir.join("malformed.alg");
    std::fs::write(
        &malformed,
        "[algebra]\nn = 3\ngenerators = e1\n\n[brackets]\n[e1 e1 e1] = 2 l1\n",
    )
    .expect("write");
    let parse = nlca(&["check", malformed.to_str().expect("utf-8 path")]);
    assert_eq!(code_of(&parse), 3);
    let err = String::from_utf8(parse.stderr).expect("utf-8 stderr");
    assert!(err.contains("line 6, column 16"), "{err}");
}

#[test]
fn machine_reports_are_byte_stable() {
    let run = || {
        let out = nlca(&["--machine", "check", "algebras/cur_simple3.alg"]);
        assert_eq!(code_of(&out), 0);
        stdout_of(&out)
    };
    let first = run();
    assert!(first.contains("check=skew\tstatus=pass\tfailures=0"), "{first}");
    assert_eq!(first, run());

    let fail = nlca(&["--machine", "plucker", "--size", "4", "--entries", "0,1=1;2,3=1"]);
    assert_eq!(code_of(&fail), 1);
    let text = stdout_of(&fail);
    assert!(text.contains("check=plucker\tstatus=fail"), "{text}");
    assert!(
        text.contains("fail=plucker\tequation=plucker\ttuple=(0,1,2,3)\tresidual=1"),
        "{text}"
    );
}
