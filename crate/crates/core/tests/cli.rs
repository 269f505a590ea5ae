use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn ncindex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncindex")).args(args).env_remove("NCG_JOBS").output().expect("binary runs")
}

fn write_config(dir: &Path, config: &Value) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(config).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn run_config(config: &Value, extra: &[&str]) -> (Output, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), config);
    let out = dir.path().join("out");
    let mut args = vec!["--config", &cfg, "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    (ncindex(&args), dir)
}

fn report(dir: &tempfile::TempDir) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/report.json")).unwrap()).unwrap()
}

#[test]
fn fredholm_powers_give_seven_exact_rows() {
    let cfg = json!({
        "name": "fredholm", "suite": "fredholm", "seed": 1,
        "model": {"manifold": "S1", "N": 32, "pad": 8},
        "params": {"powers": [-3, -2, -1, 0, 1, 2, 3]}
    });
    let (out, dir) = run_config(&cfg, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let checks = report(&dir)["checks"].as_array().unwrap().clone();
    assert_eq!(checks.len(), 7);
    for c in &checks {
        assert_eq!(c["residual"].as_f64(), Some(0.0), "{c}");
        assert_eq!(c["report"]["method"], "chi1");
    }
    let csv = std::fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("suite,check,value_re,value_im,oracle_re,oracle_im,residual,tolerance,pass"));
    assert_eq!(lines.count(), 7);
    assert!(csv.contains("fredholm,fredholm/z^+2,-2,0,-2,0,0,"));
}

#[test]
fn identities_reports_are_byte_identical() {
    let cfg = json!({
        "name": "identities", "suite": "identities", "seed": 42,
        "model": {"manifold": "S1", "N": 8, "pad": 2},
        "params": {"cases": 6}
    });
    let (a, da) = run_config(&cfg, &["--jobs", "1"]);
    let (b, db) = run_config(&cfg, &["--jobs", "4"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
    for f in ["out/report.json", "out/report.csv"] {
        assert_eq!(std::fs::read(da.path().join(f)).unwrap(), std::fs::read(db.path().join(f)).unwrap(), "{f}");
    }
    // the seed override changes the random cases
    let (_, dc) = run_config(&cfg, &["--seed", "43"]);
    assert_eq!(report(&dc)["seed"], 43);
    assert_ne!(std::fs::read(da.path().join("out/report.json")).unwrap(), std::fs::read(dc.path().join("out/report.json")).unwrap());
}

#[test]
fn sweep_residuals_decrease_and_final_row_gates() {
    let cfg = json!({
        "name": "sweep", "suite": "sweep", "seed": 9,
        "model": {"manifold": "S1", "N": 64, "pad": 16, "space": "full"},
        "params": {"N": [16, 32, 64]}
    });
    let (out, dir) = run_config(&cfg, &[]);
    let rep = report(&dir);
    let rows: Vec<&Value> = rep["checks"].as_array().unwrap().iter().filter(|c| c["check"].as_str().unwrap().starts_with("sweep/N=")).collect();
    assert_eq!(rows.len(), 3);
    let res: Vec<f64> = rows.iter().map(|r| r["residual"].as_f64().unwrap()).collect();
    assert!(res.windows(2).all(|w| w[1] <= w[0]), "{res:?}");
    assert!(rows[0]["tolerance"].is_null() && rows[1]["tolerance"].is_null());
    assert_eq!(rows[2]["tolerance"].as_f64(), Some(1e-6));
    // the exit code follows the gated final row
    let expected = if res[2] <= 1e-6 { 0 } else { 2 };
    assert_eq!(out.status.code(), Some(expected));
}

#[test]
fn failing_checks_exit_two_and_still_write_reports() {
    let cfg = json!({
        "name": "tight", "suite": "fredholm", "seed": 0,
        "model": {"manifold": "S1", "N": 8, "pad": 1},
        "params": {"powers": [0, 3]}
    });
    let (out, dir) = run_config(&cfg, &[]);
    assert_eq!(out.status.code(), Some(2));
    let rep = report(&dir);
    assert_eq!(rep["passed"], false);
    let bad = rep["checks"].as_array().unwrap().iter().find(|c| c["check"] == "fredholm/z^+3").unwrap();
    assert_eq!(bad["pass"], false);
    assert!(bad["error"].as_str().unwrap().contains("pad"));
}

#[test]
fn config_errors_exit_one() {
    let base = json!({"name": "x", "model": {"manifold": "S1", "N": 16, "pad": 4}, "suite": "fredholm"});
    let mut cases = Vec::new();
    let mut unknown_suite = base.clone();
    unknown_suite["suite"] = json!("nope");
    cases.push(unknown_suite);
    let mut negative_tol = base.clone();
    negative_tol["tolerances"] = json!({"fredholm": -1.0});
    cases.push(negative_tol);
    let mut bad_param = base.clone();
    bad_param["params"] = json!({"power": [1]});
    cases.push(bad_param);
    let mut wrong_space = base.clone();
    wrong_space["suite"] = json!("suspension");
    cases.push(wrong_space);
    let mut grid = base.clone();
    grid["suite"] = json!("sweep");
    grid["model"]["space"] = json!("full");
    grid["params"] = json!({"N": [32, 16]});
    cases.push(grid);
    for cfg in cases {
        let (out, _dir) = run_config(&cfg, &[]);
        assert_eq!(out.status.code(), Some(1), "{cfg}");
        assert!(!out.stderr.is_empty());
    }
    assert_eq!(ncindex(&["--config", "/nonexistent/config.json"]).status.code(), Some(1));
}

#[test]
fn unknown_flag_prints_usage_and_exits_one() {
    let out = ncindex(&["--frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn listing_names_six_suites() {
    let out = ncindex(&[]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let names: Vec<&str> = text.lines().filter(|l| !l.starts_with(' ')).collect();
    assert_eq!(names, ["identities", "fredholm", "helton-howe", "suspension", "heat", "sweep"]);

    let out = ncindex(&["--json"]);
    let catalog: Value = serde_json::from_slice(&out.stdout).unwrap();
    let catalog = catalog.as_array().unwrap();
    assert_eq!(catalog.len(), 6);
    assert!(catalog.iter().all(|s| s["params"].is_array() && s["certifies"].is_string()));
}

#[test]
fn jobs_default_comes_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_ncindex")).env("NCG_JOBS", "0").output().unwrap();
    assert_eq!(out.status.code(), Some(1), "NCG_JOBS=0 is rejected like --jobs 0");
    let out = Command::new(env!("CARGO_BIN_EXE_ncindex")).env("NCG_JOBS", "2").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}
