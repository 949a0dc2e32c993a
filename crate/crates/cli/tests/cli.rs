use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use eplex_cli::dataset::load_csv;
use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn eplex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eplex")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn column(v: &Value, method: &str, scheme: &str) -> Vec<f64> {
    v["probabilities"][method][scheme]
        .as_array()
        .unwrap_or_else(|| panic!("missing {method}/{scheme}"))
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect()
}

#[test]
fn load_csv_fixtures() {
    let (d, rejected) = load_csv(data("three_rows.csv"), "y").unwrap();
    assert_eq!((d.samples(), rejected), (3, 0));
    assert_eq!(d.target, vec![3.0, 7.0, 11.0]);
    let (d, rejected) = load_csv(data("one_bad_row.csv"), "y").unwrap();
    assert_eq!((d.samples(), rejected), (3, 1));
    assert!(load_csv(data("missing.csv"), "y").is_err());
    assert!(load_csv(data("three_rows.csv"), "z").is_err());
}

#[test]
fn analyze_single_individual() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("one.csv");
    std::fs::write(&p, "0.5\n").unwrap();
    let v = json(&eplex(&["analyze", p.to_str().unwrap(), "--method", "exact", "--eps", "none"]));
    assert_eq!(column(&v, "exact", "lex"), vec![1.0]);
}

#[test]
fn analyze_discrete() {
    let v = json(&eplex(&[
        "analyze",
        data("discrete.csv").to_str().unwrap(),
        "--method",
        "exact",
        "--method",
        "tournament",
    ]));
    let lex = column(&v, "exact", "lex");
    for (p, want) in lex.iter().zip([0.25, 0.0, 0.33, 0.21, 0.21]) {
        assert!((p - want).abs() <= 0.005, "{lex:?}");
    }
    let t = column(&v, "tournament", "tourn");
    for (p, want) in t.iter().zip([0.28, 0.28, 0.12, 0.04, 0.28]) {
        assert!((p - want).abs() <= 0.005, "{t:?}");
    }
}

#[test]
fn analyze_monte_carlo_reports_stderr() {
    let v = json(&eplex(&[
        "analyze",
        data("continuous.csv").to_str().unwrap(),
        "--method",
        "monte-carlo",
        "--eps",
        "dynamic",
        "--trials",
        "20000",
        "--seed",
        "4",
    ]));
    let p = column(&v, "monte-carlo", "ep-lex-d");
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    assert_eq!(v["monte_carlo_stderr"]["ep-lex-d"].as_array().unwrap().len(), 9);
}

#[test]
fn input_errors_exit_with_2() {
    assert_eq!(eplex(&["analyze", "/nonexistent/matrix.csv"]).status.code(), Some(2));
    assert_eq!(eplex(&["sweep", "--pop-sizes", "50,200"]).status.code(), Some(2));
    assert_eq!(eplex(&["analyze", data("discrete.csv").to_str().unwrap(), "--eps", "bogus"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "1,2\n3\n").unwrap();
    assert_eq!(eplex(&["analyze", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn gen_uball5d_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("u.csv");
    let out = eplex(&["gen-uball5d", "--samples", "25", "--seed", "2", "--out", p.to_str().unwrap()]);
    assert!(out.status.success());
    let (d, rejected) = load_csv(&p, "y").unwrap();
    assert_eq!((d.samples(), rejected), (25, 0));
    assert!(d.target.iter().all(|&y| y > 0.0 && y <= 2.0));
}

#[test]
fn run_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = eplex(&["run", data("tiny.toml").to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let results = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert_eq!(results.lines().count(), 1 + 2 * 5);
    let metrics = std::fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    assert!(
        metrics.starts_with("trial,seed,method,generation,best_mse,norm_mse,diversity,median_case_depth,sel_time_ms")
    );
    assert_eq!(metrics.lines().count(), 1 + 2 * 5 * 4);
    let summary: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    for m in summary["methods"].as_array().unwrap() {
        let r = m["mean_rank"].as_f64().unwrap();
        assert!((1.0..=5.0).contains(&r));
    }
    assert_eq!(summary["dataset"]["input_range"][0].as_f64(), Some(0.05));
}

#[test]
fn run_on_csv_dataset_reports_rejections() {
    let dir = tempfile::tempdir().unwrap();
    let out = eplex(&["run", data("csv_spec.toml").to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("1 malformed"));
    let summary: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["dataset"]["rejected_rows"], 1);
    assert_eq!(summary["dataset"]["samples"], 3);
}
