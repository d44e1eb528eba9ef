use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn rossler(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rossler"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn analyze_at_the_reference_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = rossler(
        dir.path(),
        &["analyze", "--a", "0.468", "--b", "0.3", "--c", "4.615"],
    );
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    let g = doc["result"]["gamma_in"].as_f64().unwrap();
    assert!((g + 4.5519).abs() < 1e-3, "{g}");
    assert_eq!(doc["config"]["a"].as_f64(), Some(0.468));
    assert_eq!(doc["version"].as_str(), Some(env!("CARGO_PKG_VERSION")));
    assert!(dir.path().join("analyze.json").exists());
}

#[test]
fn analyze_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let a1 = rossler(
        dir.path(),
        &["analyze", "--a", "0.5", "--b", "0.5", "--c", "0.2"],
    );
    assert_eq!(a1.status.code(), Some(1));
    assert_eq!(
        json(&a1)["result"]["assumptions"]["a1"]["pass"],
        Value::Bool(false)
    );
    let degenerate = rossler(
        dir.path(),
        &["analyze", "--a", "0.3", "--b", "0.3", "--c", "0.09"],
    );
    assert_eq!(degenerate.status.code(), Some(2));
    assert_eq!(
        json(&degenerate)["result"]["code"].as_str(),
        Some("degenerate_fixed_points")
    );
}

#[test]
fn usage_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    let empty_box = rossler(dir.path(), &["hetero-search", "--half-width", "0"]);
    assert_eq!(empty_box.status.code(), Some(64));
    assert_eq!(
        rossler(dir.path(), &["no-such-command"]).status.code(),
        Some(64)
    );
    assert_eq!(rossler(dir.path(), &["knots"]).status.code(), Some(64));
    assert_eq!(
        rossler(dir.path(), &["analyze", "--set", "rel_tol=-1"])
            .status
            .code(),
        Some(64)
    );
}

#[test]
fn template_knots_report_every_primitive_word() {
    let dir = tempfile::tempdir().unwrap();
    let out = rossler(dir.path(), &["knots", "--template", "--max-len", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    let words: Vec<&str> = doc["result"]["reports"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["word"].as_str().unwrap())
        .collect();
    assert_eq!(
        words,
        ["1", "2", "12", "112", "122", "1112", "1122", "1222"]
    );
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# simple attractor\na = 0.2\nb = 0.2\nc = 5.7\n").unwrap();
    let out = rossler(
        dir.path(),
        &["analyze", "--config", cfg.to_str().unwrap(), "--c", "5.0"],
    );
    let doc = json(&out);
    assert_eq!(doc["config"]["a"].as_f64(), Some(0.2));
    assert_eq!(doc["config"]["c"].as_f64(), Some(5.0));
}

#[test]
fn orbit_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "orbits",
        "--k",
        "1",
        "--a",
        "0.2",
        "--b",
        "0.2",
        "--c",
        "5.7",
        "--recurrence",
        "300",
        "--seed",
        "3",
    ];
    let first = rossler(dir.path(), &args);
    assert_eq!(first.status.code(), Some(0));
    let csv = std::fs::read(dir.path().join("orbits.csv")).unwrap();
    let doc = json(&first);
    for o in doc["result"]["orbits"].as_array().unwrap() {
        assert!(o["residual"].as_f64().unwrap() <= 1e-9);
        assert_eq!(o["k"].as_u64(), Some(1));
    }
    let second = rossler(dir.path(), &[&args[..], &["--workers", "1"]].concat());
    let strip = |v: &Output| {
        let mut d = json(v);
        d["config"]["workers"] = Value::Null;
        d
    };
    assert_eq!(strip(&first), strip(&second));
    assert_eq!(csv, std::fs::read(dir.path().join("orbits.csv")).unwrap());
}

#[test]
fn return_map_writes_a_sample_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = rossler(
        dir.path(),
        &[
            "return-map",
            "--a",
            "0.2",
            "--b",
            "0.2",
            "--c",
            "5.7",
            "--n",
            "20",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["returns"].as_u64(), Some(20));
    let csv = std::fs::read_to_string(dir.path().join("return_map.csv")).unwrap();
    assert_eq!(csv.lines().count(), 21);
}
