use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sparseweak::cli::config::Config;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparseweak"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn with_config(dir: &Path, json: &str) -> String {
    let p = dir.join("cfg.json");
    fs::write(&p, json).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn malformed_json_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = with_config(dir.path(), "{\"params\": ");
    let out = run(dir.path(), &["char", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("malformed JSON"));
}

#[test]
fn unknown_field_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = with_config(dir.path(), r#"{"weigth": {"kind": "constant"}}"#);
    assert_eq!(run(dir.path(), &["char", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn non_integrable_weight() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = with_config(dir.path(), r#"{"weight": {"kind": "power", "beta": -1.0}}"#);
    assert_eq!(run(dir.path(), &["char", "--config", &cfg]).status.code(), Some(3));
}

#[test]
fn testing_needs_p_above_nu() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = with_config(dir.path(), r#"{"params": {"p": 2, "q": 2, "nu": 2}}"#);
    let out = run(dir.path(), &["testing", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn empty_theta_grid_is_a_degenerate_fit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = with_config(dir.path(), r#"{"sharpness": {"theta_grid": []}}"#);
    assert_eq!(run(dir.path(), &["sharpness", "--config", &cfg]).status.code(), Some(5));
}

#[test]
fn broken_family_fails_verify() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = with_config(
        dir.path(),
        r#"{"verify": {"families": [{"gamma": 0.5, "cubes": [
            {"level": 0, "index": [0]}, {"level": 1, "index": [0]}, {"level": 1, "index": [1]}]}]}}"#,
    );
    let out = run(dir.path(), &["verify", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sparseness"));
}

#[test]
fn verify_passes_by_default() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["verify", "--verbose"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("ok   riesz_endpoints"));
}

#[test]
fn riesz_nodes_hit_the_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = with_config(dir.path(), r#"{"params": {"q": 4, "alpha": 0.5}, "apply": {"riesz": true}}"#);
    let out = run(dir.path(), &["apply", "--config", &cfg, "--depth", "6", "--out", "o"]);
    assert_eq!(out.status.code(), Some(0));
    let mut rd = csv::Reader::from_path(dir.path().join("o/riesz_nodes.csv")).unwrap();
    let rows: Vec<(f64, f64)> = rd
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), r[1].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 65);
    assert!((rows[0].1 - 2.0).abs() < 1e-12);
    assert_eq!(rows[32].0, 0.5);
    assert!((rows[32].1 - 2.0 * 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = with_config(dir.path(), r#"{"testing": {"suite": 3}, "params": {"p": 2.5, "q": 3, "nu": 1.5}}"#);
    for out in ["a", "b"] {
        assert_eq!(run(dir.path(), &["testing", "--config", &cfg, "--out", out]).status.code(), Some(0));
    }
    for name in ["testing.csv", "testing.json"] {
        let a = fs::read(dir.path().join("a").join(name)).unwrap();
        let b = fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn report_feeds_back_as_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = with_config(dir.path(), r#"{"params": {"q": 8, "alpha": 0.25}, "weight": {"kind": "extremal", "theta": 0.25}}"#);
    assert_eq!(run(dir.path(), &["char", "--config", &cfg, "--out", "a", "--depth", "8"]).status.code(), Some(0));
    let first = dir.path().join("a/characteristics.json");
    let embedded = Config::load(&first).unwrap();
    assert_eq!(embedded.depth, 8);
    assert_eq!(embedded.params.p, Some(1.0 / (1.0 / 8.0 + 0.25)));
    let again = run(dir.path(), &["char", "--config", first.to_str().unwrap(), "--out", "b"]);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(fs::read(&first).unwrap(), fs::read(dir.path().join("b/characteristics.json")).unwrap());
}

#[test]
fn char_without_out_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["char"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["a_pq"], 1.0);
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["--help"]).status.code(), Some(0));
}
