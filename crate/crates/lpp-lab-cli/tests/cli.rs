use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lpp(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lpp-lab"))
        .args(args)
        .current_dir(dir)
        .env_remove("LPP_LAB_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn sample_writes_histogram_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["sample", "--t", "0.5", "--M", "1", "--N", "1", "--count", "100000", "--seed", "7"];
    let out = lpp(&args, dir.path());
    assert!(out.status.success());
    let first = std::fs::read(dir.path().join("sample.csv")).unwrap();
    assert!(String::from_utf8_lossy(&first).starts_with("g,count\n"));
    let out = lpp(&args, dir.path());
    assert!(out.status.success());
    assert_eq!(first, std::fs::read(dir.path().join("sample.csv")).unwrap());
    let total: usize = String::from_utf8(first)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(total, 100_000);
}

#[test]
fn invalid_t_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = lpp(&["sample", "--t", "1.5", "--M", "1", "--N", "1", "--count", "10"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("(0, 1)"));
}

#[test]
fn exact_geometric_case_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["exact", "--t", "0.5", "--M", "1", "--N", "1", "--nmax", "10"];
    let csv_out = lpp(&[&base[..], &["--out", "e.csv"]].concat(), dir.path());
    assert!(csv_out.status.success());
    let json_out = lpp(&[&base[..], &["--out", "e.json", "--format", "json"]].concat(), dir.path());
    assert!(json_out.status.success());

    let json = read_json(&dir.path().join("e.json"));
    assert!(json["truncation_eps"].as_f64().unwrap() > 0.0);
    assert!(json["k_max"].as_u64().unwrap() >= 10);
    let rows = json["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 11);
    let csv = std::fs::read_to_string(dir.path().join("e.csv")).unwrap();
    for (line, row) in csv.lines().skip(1).zip(rows) {
        let cells: Vec<&str> = line.split(',').collect();
        let n: i32 = cells[0].parse().unwrap();
        let cdf: f64 = cells[2].parse().unwrap();
        assert!((cdf - (1.0 - 0.25f64.powi(n + 1))).abs() < 1e-12);
        assert_eq!(cdf, row["cdf"].as_f64().unwrap());
        assert_eq!(cells[1].parse::<f64>().unwrap(), row["log_cdf"].as_f64().unwrap());
    }
}

#[test]
fn exact_oracle_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = lpp(&["exact", "--t", "0.3", "--M", "2", "--N", "2", "--nmax", "6", "--check-oracle"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS"));
    let out = lpp(&["exact", "--t", "0.3", "--M", "9", "--N", "9", "--nmax", "6", "--check-oracle"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn contours_at_reference_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let out = lpp(&["contours", "--t", "0.70710678", "--gamma", "2", "--a", "4", "--out", "c"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let c = dir.path().join("c");
    for name in ["gamma1.csv", "gamma2.csv"] {
        let text = std::fs::read_to_string(c.join(name)).unwrap();
        assert!(text.starts_with("s,re,im\n"));
        assert!(text.lines().count() > 100);
    }
    let report = read_json(&c.join("report.json"));
    assert!(report["p_i"].as_f64().unwrap() > 0.0);
    assert!(report["z0_residual"].as_f64().unwrap() < 1e-6);
    assert!(report["real_period_residual"].as_f64().unwrap() < 1e-6);
}

#[test]
fn contours_reject_a_at_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let out = lpp(&["contours", "--t", "0.5", "--gamma", "1", "--a", "0.5"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("must exceed a0"));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from_env");
    let out = Command::new(env!("CARGO_BIN_EXE_lpp-lab"))
        .args(["sample", "--t", "0.4", "--M", "2", "--N", "3", "--count", "50", "--format", "json"])
        .current_dir(dir.path())
        .env("LPP_LAB_OUT_DIR", &target)
        .output()
        .unwrap();
    assert!(out.status.success());
    let json = read_json(&target.join("sample.json"));
    assert_eq!(json["count"].as_u64(), Some(50));
}

#[test]
fn validate_suites_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = lpp(&["validate", "--suite", "identities"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let out = lpp(&["validate", "--suite", "tails", "--N", "216", "--x", "3", "--out", "tails.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let report = read_json(&dir.path().join("tails.json"));
    assert!(report["checks"].as_array().unwrap().iter().all(|c| c["pass"] == Value::Bool(true)));
    let out = lpp(&["validate", "--suite", "rhp", "--t", "0.70710678", "--gamma", "2", "--a", "4"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn validate_reports_failure_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    // x far outside the window
    let out = lpp(&["validate", "--suite", "tails", "--N", "64", "--x", "0.2"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}
