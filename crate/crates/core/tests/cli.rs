//! End-to-end runs of the `kneading` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

const GOLDEN: &str = r#"{"interval": [0, 1], "cuts": ["1/2"], "branches": [
    {"type": "linear", "slope": 2, "intercept": 0, "weight": 1},
    {"type": "linear", "slope": 1, "intercept": "-1/2", "weight": 1}]}"#;

fn write_config(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("kneading-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str], config: &PathBuf) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kneading")).args(args).arg("--config").arg(config).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn entropy_of_golden_map() {
    let out = run(&["entropy"], &write_config("entropy.json", GOLDEN));
    assert!(out.status.success());
    let v = json(&out);
    let t = v["t_star"].as_f64().unwrap();
    assert!((t - 0.618_033_988_749_895).abs() < 1e-10);
    assert_eq!(v["method"], "exact-sturm");
}

#[test]
fn ruelle_polynomial() {
    let out = run(&["ruelle-det"], &write_config("ruelle.json", GOLDEN));
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["poly"], serde_json::json!([1, -1, -1]));
    assert_eq!(v["ratio_to_kneading"]["num"], serde_json::json!([1, -1, -1, 1]));
}

#[test]
fn lap_counts_as_csv() {
    let out = run(&["lap-counts", "--n", "4"], &write_config("laps.json", GOLDEN));
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "n,count\n1,2\n2,3\n3,5\n4,8\n");
}

#[test]
fn missing_branches_is_a_config_error() {
    let out = run(&["entropy"], &write_config("bad.json", r#"{"interval": [0, 1]}"#));
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["error"], "Config");
    assert_eq!(v["detail"], "branches: required");
}

#[test]
fn non_markov_map_fails_at_runtime() {
    let text = r#"{"interval": [0, 1], "cuts": [0.5], "mode": "numeric", "branches": [
        {"slope": 1.4142135623730951, "intercept": 0}, {"slope": 1, "intercept": -0.5}]}"#;
    let out = run(&["ruelle-det"], &write_config("sqrt2.json", text));
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"], "NotMarkov");
}

#[test]
fn unknown_command_is_a_usage_error() {
    let out = run(&["frobnicate"], &write_config("usage.json", GOLDEN));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn output_is_deterministic() {
    let path = write_config("report.json", GOLDEN);
    let a = run(&["spectral-report", "--threads", "1"], &path);
    let b = run(&["spectral-report"], &path);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}
