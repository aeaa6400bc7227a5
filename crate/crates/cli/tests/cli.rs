//! End-to-end tests of the command-line interface: determinism, exit codes,
//! and the config-file merge.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_siegelforms"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn tmp_path(name: &str) -> PathBuf {
    let mut path = std::env::temp_dir();
    path.push(format!("siegelforms-test-{}-{name}", std::process::id()));
    path
}

#[test]
fn rep_info_reports_dimension() {
    let out = run(&["rep-info", "--n", "3", "--omega", "2,1,0"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json["dim"], 8);
    assert_eq!(json["det_twist"], 0);
}

#[test]
fn eval_f_at_default_point_returns_seed_vector() {
    let out = run(&["eval-f", "--n", "1", "--omega", "3", "--mu", "1", "--v", "hwv"]);
    assert!(out.status.success());
    let json: serde_json::Value =
        serde_json::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(json["value"][0][0], 1.0);
    assert_eq!(json["value"][0][1], 0.0);
}

#[test]
fn stochastic_outputs_are_byte_identical_for_same_seed() {
    let args = [
        "c-rho", "--n", "1", "--omega", "3", "--samples", "20000", "--seed", "5", "--workers",
        "3",
    ];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout, "same seed must give same bytes");
    let third = run(&[
        "c-rho", "--n", "1", "--omega", "3", "--samples", "20000", "--seed", "6", "--workers",
        "3",
    ]);
    assert_ne!(first.stdout, third.stdout, "different seed should differ");
}

#[test]
fn estimates_carry_value_stderr_samples_seed() {
    let out = run(&[
        "c-rho", "--n", "1", "--omega", "3", "--samples", "20000", "--seed", "5",
    ]);
    let json: serde_json::Value =
        serde_json::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    for key in ["value", "stderr", "samples", "seed"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    assert_eq!(json["seed"], 5);
    assert_eq!(json["samples"], 20000);
}

#[test]
fn n0_scalar_ledger_ends_at_fourteen() {
    let out = run(&[
        "n0", "--n", "1", "--omega", "3", "--mu", "1", "--samples", "200000", "--seed", "3",
        "--workers", "2", "--format", "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let last = text.lines().last().unwrap();
    assert!(last.starts_with("14,"), "ledger should end at N = 14: {last}");
    assert!(last.ends_with("HOLDS"));
    assert_eq!(text.lines().count(), 13, "header plus N = 3..14");
}

#[test]
fn n0_undecided_when_scan_stops_early() {
    let out = run(&[
        "n0", "--n", "1", "--omega", "3", "--mu", "1", "--samples", "20000", "--seed", "3",
        "--N-max", "5",
    ]);
    assert_eq!(out.status.code(), Some(4), "no certified level -> exit 4");
}

#[test]
fn exit_code_config_error() {
    // increasing weight is invalid
    let out = run(&["rep-info", "--n", "2", "--omega", "1,2"]);
    assert_eq!(out.status.code(), Some(2));
    // malformed polynomial
    let out = run(&["eval-f", "--n", "1", "--omega", "3", "--mu", "X99"]);
    assert_eq!(out.status.code(), Some(2));
    // wrong arity
    let out = run(&["rep-info", "--n", "2", "--omega", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exit_code_numerical_precondition() {
    // omega_n = 2n is not integrable: the series must refuse
    let out = run(&["poincare", "--n", "1", "--omega", "2", "--mu", "1"]);
    assert_eq!(out.status.code(), Some(3));
    // C_rho needs omega_n > n
    let out = run(&["c-rho", "--n", "1", "--omega", "1", "--samples", "1000"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn exit_code_resource_cap() {
    let out = run(&["rep-info", "--n", "3", "--omega", "9,0,0"]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn selftest_small_budget_passes() {
    let out = run(&["selftest", "--samples", "30000", "--seed", "2", "--workers", "2"]);
    assert!(
        out.status.success(),
        "selftest failed:\n{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() >= 20);
    assert!(text.lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let path = tmp_path("config");
    std::fs::write(&path, "omega=4\nmu=1\nn=1\n").unwrap();
    let out = run(&["eval-f", "--config", path.to_str().unwrap()]);
    assert!(out.status.success());

    // the flag wins over the file entry
    let out_flag = run(&[
        "eval-f",
        "--config",
        path.to_str().unwrap(),
        "--omega",
        "3",
    ]);
    assert!(out_flag.status.success());
    let via_flag: serde_json::Value =
        serde_json::from_str(&String::from_utf8(out_flag.stdout).unwrap()).unwrap();
    assert_eq!(via_flag["value"][0][0], 1.0);
    std::fs::remove_file(&path).ok();
}

#[test]
fn rep_save_roundtrips() {
    let path = tmp_path("rep.json");
    let out = run(&[
        "rep-info",
        "--n",
        "2",
        "--omega",
        "4,3",
        "--save",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let rep = siegelforms::glrep::PolyRep::from_json(&text).unwrap();
    assert_eq!(rep.dim(), 2);
    assert_eq!(rep.to_json(), text);
    std::fs::remove_file(&path).ok();
}

#[test]
fn fourier_character_via_cli() {
    // f_{1,v} has nontrivial Fourier coefficients; just exercise the wiring
    let out = run(&[
        "fourier", "--n", "1", "--omega", "3", "--mu", "1", "--T", "[[1.0]]", "--level", "1",
        "--points", "32",
    ]);
    assert!(out.status.success());
    let json: serde_json::Value =
        serde_json::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!(json["value"].is_array());
}

#[test]
fn matcoef_reports_reference_consistency() {
    let out = run(&[
        "matcoef", "--n", "1", "--omega", "3", "--mu", "1", "--samples", "150000", "--seed",
        "11", "--workers", "2",
    ]);
    assert!(out.status.success());
    let json: serde_json::Value =
        serde_json::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(json["consistent_at_3_sigma"], true);
}

#[test]
fn kak_check_consistent_ratios() {
    let out = run(&[
        "kak-check", "--n", "1", "--omega", "4", "--mu", "1", "--samples", "80000", "--seed",
        "13", "--radii", "0.3,0.6,1.0",
    ]);
    assert!(out.status.success());
    let json: serde_json::Value =
        serde_json::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(json["consistent"], true);
    assert_eq!(json["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn csv_rejected_outside_the_ledger() {
    let out = run(&["rep-info", "--n", "1", "--omega", "3", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_flag_writes_the_report() {
    let path = tmp_path("out.json");
    let out = run(&[
        "eval-f", "--n", "1", "--omega", "3", "--mu", "1", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("value"));
    std::fs::remove_file(&path).ok();
}
