//! The binary end to end: exit codes, output files and manifests.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orlicz-polytope")).args(args).env_remove("ORLICZ_POLYTOPE_SEED").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn estimate_cube_two_points() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let o = run(&["estimate", "--p", "inf", "--n", "10", "--N", "2", "--dir", "e1", "--trials", "50", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(tmp.path(), "report.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "direction,N,orlicz_value,mc_mean,ci_low,ci_high,ratio,upper_bound");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "e1");
    let v: f64 = row[2].parse().unwrap();
    assert!((v - 0.190_983_005_625_052_6).abs() < 1e-10);
    let report: serde_json::Value = serde_json::from_str(&read(tmp.path(), "report.json")).unwrap();
    assert_eq!(report["results"].as_array().unwrap().len(), 1);
    let manifest: serde_json::Value = serde_json::from_str(&read(tmp.path(), "manifest.json")).unwrap();
    assert_eq!(manifest["command"], "estimate");
    assert_eq!(manifest["config"]["p"], "inf");
}

#[test]
fn zero_trials_leave_mc_columns_empty() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["estimate", "--p", "2", "--n", "5", "--N", "10", "--trials", "0", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let csv = read(tmp.path(), "report.csv");
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert!(row[3].is_empty() && row[6].is_empty());
}

#[test]
fn config_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x");
    let out = out.to_str().unwrap();
    assert_eq!(code(&run(&["estimate", "--p", "0.5", "--n", "3", "--N", "10", "--out", out])), 2);
    assert_eq!(code(&run(&["estimate", "--bogus"])), 2);
    assert_eq!(code(&run(&["scan", "--p", "2", "--n", "3", "--N", "10", "--out", out])), 2);
    assert_eq!(code(&run(&["validate", "--grid-p", "", "--out", out])), 2);
    assert_eq!(code(&run(&["estimate", "--config", "/nonexistent/cfg", "--out", out])), 2);
    assert!(!tmp.path().join("x").join("manifest.json").exists());
}

#[test]
fn flat_config_file_and_flag_override() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    std::fs::write(&cfg, "# cube\np = inf\nn = 4\nN = 2, 10\ntrials = 0\n").unwrap();
    let out = tmp.path().join("o");
    let o = run(&["estimate", "--config", cfg.to_str().unwrap(), "--n", "6", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let manifest: serde_json::Value = serde_json::from_str(&read(&out, "manifest.json")).unwrap();
    assert_eq!(manifest["config"]["n"], "6");
    assert_eq!(read(&out, "report.csv").lines().count(), 3);
}

#[test]
fn validate_passes_and_perturbation_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let good = tmp.path().join("good");
    let args = ["validate", "--grid-p", "2,inf", "--grid-n", "2,10"];
    let mut a = args.to_vec();
    a.extend(["--out", good.to_str().unwrap()]);
    let o = run(&a);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let report: serde_json::Value = serde_json::from_str(&read(&good, "validate.json")).unwrap();
    assert_eq!(report["passed"], true);

    let bad = tmp.path().join("bad");
    let mut a = args.to_vec();
    a.extend(["--perturb", "--out", bad.to_str().unwrap()]);
    assert_eq!(code(&run(&a)), 1);
    let report: serde_json::Value = serde_json::from_str(&read(&bad, "validate.json")).unwrap();
    assert_eq!(report["passed"], false);
    assert!(bad.join("manifest.json").exists());
}

#[test]
fn tabulate_m_writes_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["tabulate-m", "--p", "3", "--n", "10", "--points", "7", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let csv = read(tmp.path(), "m.csv");
    assert_eq!(csv.lines().next().unwrap(), "t,M");
    let m: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(m.len(), 7);
    assert_eq!(m[0], 0.0);
    assert!(m.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn directions_on_the_ball_are_constant() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["directions", "--p", "2", "--n", "6", "--N", "100", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_str(&read(tmp.path(), "summary.json")).unwrap();
    assert_eq!(summary["distinct_estimates"], 1);
    assert_eq!(read(tmp.path(), "directions.csv").lines().count(), 1001);
}

#[test]
fn seed_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_orlicz-polytope"))
        .args(["estimate", "--p", "2", "--n", "3", "--N", "10", "--trials", "5", "--out", tmp.path().to_str().unwrap()])
        .env("ORLICZ_POLYTOPE_SEED", "77")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let manifest: serde_json::Value = serde_json::from_str(&read(tmp.path(), "manifest.json")).unwrap();
    assert_eq!(manifest["config"]["seed"], "77");
}
