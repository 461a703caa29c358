use std::process::{Command, Output};

use serde_json::Value;

fn robinlap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_robinlap")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

/// Disk eigenvalue at p = 2 from k·I₁(k) = α·I₀(k), λ = −k².
fn disk_oracle(alpha: f64) -> f64 {
    let ratio = |x: f64| {
        let q = x * x / 4.0;
        let (mut t0, mut t1) = (1.0, x / 2.0);
        let (mut i0, mut i1) = (t0, t1);
        for m in 1..200 {
            let m = m as f64;
            t0 *= q / (m * m);
            t1 *= q / (m * (m + 1.0));
            i0 += t0;
            i1 += t1;
        }
        i1 / i0
    };
    let (mut lo, mut hi) = (0.0, alpha + 2.0);
    for _ in 0..100 {
        let k = 0.5 * (lo + hi);
        if k * ratio(k) < alpha {
            lo = k;
        } else {
            hi = k;
        }
    }
    -(0.5 * (lo + hi)).powi(2)
}

#[test]
fn solve_ball_matches_the_bessel_oracle() {
    let out = robinlap(&["solve", "--domain", r#"{"kind":"ball","rho":1,"nu":2}"#, "--p", "2", "--alpha", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let lambda = v["eigenvalue"].as_f64().unwrap();
    let oracle = disk_oracle(1.0);
    assert!(((lambda - oracle) / oracle).abs() < 1e-4, "{lambda} vs {oracle}");
    assert_eq!(v["converged"], Value::Bool(true));
}

#[test]
fn half_line_sweep_csv() {
    let out = robinlap(&["sweep", "--domain", "halfline", "--p", "3", "--alphas", "1,4,16"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("alpha,lambda,residual,converged"));
    let mut n = 0;
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        let a: f64 = cols[0].parse().unwrap();
        let l: f64 = cols[1].parse().unwrap();
        let exact = -2.0 * a.powf(1.5);
        assert!(((l - exact) / exact).abs() < 1e-3, "{line}");
        assert_eq!(cols[3], "true");
        n += 1;
    }
    assert_eq!(n, 3);
}

#[test]
fn selftest_passes() {
    let out = robinlap(&["selftest"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(json(&out)["passed"], Value::Bool(true));
}

#[test]
fn validation_errors_exit_two() {
    for args in [
        vec!["solve", "--domain", "ball", "--p", "2", "--alpha", "1"],
        vec!["solve", "--domain", r#"{"kind":"ball","rho":0,"nu":2}"#, "--p", "2", "--alpha", "1"],
        vec!["solve", "--domain", "halfline", "--p", "0.5", "--alpha", "1"],
        vec!["solve", "--domain", "halfline", "--alpha", "1"],
        vec!["sweep", "--domain", "halfline", "--p", "2", "--alphas", "3,1"],
        vec!["solve", "--domain", "halfline", "--p", "50", "--alpha", "1"],
        vec!["frobnicate"],
    ] {
        let out = robinlap(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn non_convergence_exits_three() {
    let out = robinlap(&[
        "solve",
        "--domain",
        r#"{"kind":"shell","inner":0.5,"outer":1,"nu":3}"#,
        "--p",
        "2.5",
        "--alpha",
        "7",
        "--max-iterations",
        "1",
        "--no-newton",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["converged"], Value::Bool(false));
}

#[test]
fn config_file_and_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let dest = dir.path().join("out.csv");
    std::fs::write(&cfg, r#"{"domain": {"kind": "halfline"}, "p": 2, "alphas": [1, 2, 4], "solver": {"cells": 400}}"#).unwrap();
    let out = robinlap(&["sweep", "--config", cfg.to_str().unwrap(), "--output", dest.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&dest).unwrap();
    assert_eq!(text.lines().count(), 4);

    std::fs::write(&cfg, r#"{"p": 2, "unknown_key": 1}"#).unwrap();
    let out = robinlap(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::write(&cfg, r#"{"p": 2, "solver": {"cellz": 10}}"#).unwrap();
    let out = robinlap(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let args = [
        "sweep",
        "--domain",
        r#"{"kind":"shell","inner":0.75,"outer":1.25,"nu":2}"#,
        "--p",
        "2.5",
        "--alphas",
        "1,4,16",
        "--jobs",
        "3",
        "--seed",
        "5",
    ];
    let a = robinlap(&args);
    let b = robinlap(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let s1 = robinlap(&["selftest", "--seed", "9"]);
    let s2 = robinlap(&["selftest", "--seed", "9"]);
    assert_eq!(s1.stdout, s2.stdout);

    let slope = |jobs: &str| {
        robinlap(&["trace-slope", "--domain", r#"{"kind":"ball","rho":1,"nu":3}"#, "--p", "2", "--mus", "4,8,16", "--jobs", jobs]).stdout
    };
    assert_eq!(slope("1"), slope("4"));
}

#[test]
fn twelve_significant_digits() {
    let out = robinlap(&["solve", "--domain", "halfline", "--p", "2", "--alpha", "3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for token in text.split(|c: char| !(c.is_ascii_digit() || c == '.' || c == '-' || c == 'e')) {
        let digits = token.split('e').next().unwrap().chars().filter(|c| c.is_ascii_digit()).count();
        assert!(digits <= 13, "{token}");
    }
    let csv = robinlap(&["sweep", "--domain", "halfline", "--p", "2", "--alphas", "3"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    let row = text.lines().nth(1).unwrap();
    assert_eq!(row.split(',').next().unwrap(), "3.00000000000e0");
}

#[test]
fn eigenfunction_csv() {
    let out = robinlap(&["solve", "--domain", "halfline", "--p", "2", "--alpha", "2", "--cells", "50", "--csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("t,u\n"));
    assert_eq!(text.lines().count(), 52);
}

#[test]
fn trace_and_trace_slope() {
    let out = robinlap(&["trace", "--domain", "halfline", "--p", "3"]);
    let s = json(&out)["s"].as_f64().unwrap();
    assert!((s - 0.629961).abs() < 1e-6);
    let out = robinlap(&["trace-slope", "--domain", r#"{"kind":"ball","rho":1,"nu":2}"#, "--p", "2", "--mus", "8,16,32,64", "--tol", "1e-10", "--jobs", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["s_inf"].as_f64().unwrap() - 1.0).abs() < 0.02);
    assert!((v["slope"].as_f64().unwrap() - 0.5).abs() < 0.05);
    let out = robinlap(&["trace-slope", "--domain", r#"{"kind":"ball","rho":1,"nu":2}"#, "--p", "2", "--mus", "8,16,32", "--csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("mu,S\n"));
}

#[test]
fn compare_rates_concentration() {
    let out = robinlap(&["compare", "--inner", "0.75", "--p", "2", "--alpha", "100"]);
    let v = json(&out);
    assert_eq!(v["outer"].as_f64().unwrap(), 1.25);
    assert_eq!(v["ball_below"], Value::Bool(true));

    let out = robinlap(&["rates", "--domain", r#"{"kind":"ball","rho":1,"nu":3}"#, "--p", "3", "--alphas", "5,10,20,40,80,160,320,640"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert!(v["slope"].as_f64().unwrap() < 1.0);
    assert_eq!(v["reference_exponent"].as_f64().unwrap(), 0.75);

    let out = robinlap(&["rates", "--domain", "halfline", "--p", "2", "--alphas", "1,2,4"]);
    assert_eq!(out.status.code(), Some(3));

    let out = robinlap(&["concentration", "--domain", "halfline", "--p", "2", "--alpha", "10"]);
    let v = json(&out);
    assert!((v["decay_slope"].as_f64().unwrap() + 10.0).abs() < 1.0);
}

#[test]
fn sector_solve_is_closed_form() {
    let out = robinlap(&["solve", "--domain", r#"{"kind":"sector","theta":0.7853981633974483}"#, "--p", "2", "--alpha", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["eigenvalue"].as_f64().unwrap() + 2.0).abs() < 1e-9);
    assert_eq!(v["method"], "closed_form");
}
