//! End-to-end checks of the command-line surface: schemas, determinism,
//! exit codes, and the singular-sample flagging contract.

use std::path::Path;
use std::process::{Command, Output};

fn spinbath(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinbath"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) -> String {
    let out = spinbath(args);
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn trace_zero_coupling_is_identity_channel() {
    let stdout = run_ok(&[
        "trace", "--n-bath", "12", "--alpha", "0", "--t-max", "2", "--dt", "0.5",
    ]);
    let mut lines = stdout.lines();
    assert_eq!(lines.next().unwrap(), "t,a,b,c_re,c_im,flag");
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        let a: f64 = cells[1].parse().unwrap();
        let b: f64 = cells[2].parse().unwrap();
        let c_re: f64 = cells[3].parse().unwrap();
        assert!((a - 1.0).abs() < 1e-12, "A != 1 in {line}");
        assert!(b.abs() < 1e-12, "B != 0 in {line}");
        assert!((c_re - 1.0).abs() < 1e-12);
        assert_eq!(cells[5], "ok");
    }
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("a.csv");
    let out2 = dir.path().join("b.csv");
    let args = |out: &Path| {
        vec![
            "nonmarkov".to_string(),
            "--n-bath".into(),
            "10".into(),
            "--alpha".into(),
            "0.05".into(),
            "--t-max".into(),
            "20".into(),
            "--dt".into(),
            "0.05".into(),
            "--out".into(),
            out.display().to_string(),
        ]
    };
    let s1: Vec<String> = args(&out1);
    let s2: Vec<String> = args(&out2);
    let r1 = spinbath(&s1.iter().map(String::as_str).collect::<Vec<_>>());
    let r2 = spinbath(&s2.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(r1.status.success() && r2.status.success());
    assert_eq!(std::fs::read(&out1).unwrap(), std::fs::read(&out2).unwrap());
    // the stdout summary is deterministic too
    assert_eq!(r1.stdout, r2.stdout);
}

#[test]
fn nonmarkov_q_nonnegative_with_bursts_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nm.csv");
    let stdout = run_ok(&[
        "nonmarkov",
        "--n-bath",
        "20",
        "--alpha",
        "0.03",
        "--t-max",
        "60",
        "--dt",
        "0.02",
        "--out",
        out.to_str().unwrap(),
    ]);
    let summary: serde_json::Value = serde_json::from_str(stdout.trim()).unwrap();
    assert!(summary["eta"].as_f64().unwrap() > 0.0);
    let g = summary["g_measure"].as_f64().unwrap();
    assert!(g > 0.0 && g < 1.0);
    assert!(summary["blp_lower_bound"].as_f64().unwrap() > 0.0);

    let body = std::fs::read_to_string(&out).unwrap();
    let mut positive = 0usize;
    for line in body.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let q: f64 = cells[3].parse().unwrap();
        assert!(q >= 0.0);
        if q > 0.0 {
            positive += 1;
        }
    }
    assert!(positive > 0, "no divisibility-breaking bursts recorded");
}

#[test]
fn thermo_flags_pure_initial_sample() {
    let stdout = run_ok(&[
        "thermo",
        "--n-bath",
        "8",
        "--alpha",
        "0.05",
        "--t-max",
        "1",
        "--dt",
        "0.5",
        "--initial",
        "1",
    ]);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(
        lines[0],
        "t,gamma_dis,entropy,sigma,sigma_limit,bloch_x,purity,purity_rate,flag"
    );
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(first[8], "pure_state");
    assert_eq!(first[3], "", "sigma must be empty at the singular sample");
    assert_eq!(first[4], "0", "stationary limit at t = 0");
    for line in &lines[2..] {
        assert!(line.ends_with(",ok"), "unexpected flag in {line}");
    }
}

#[test]
fn thermo_accepts_bloch_vector_initial_state() {
    let stdout = run_ok(&[
        "thermo",
        "--n-bath",
        "8",
        "--alpha",
        "0.05",
        "--t-max",
        "1",
        "--dt",
        "0.5",
        "--initial",
        "0.3,-0.2,0.1",
    ]);
    assert_eq!(stdout.lines().count(), 4);
    assert!(stdout.lines().skip(1).all(|l| l.ends_with(",ok")));
}

#[test]
fn json_format_is_an_array_of_rows() {
    let stdout = run_ok(&[
        "rates", "--n-bath", "6", "--alpha", "0.1", "--t-max", "1", "--dt", "0.25", "--format",
        "json",
    ]);
    let rows: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0]["flag"], "ok");
    assert!(rows[0]["gamma_dis"].is_number());
    assert_eq!(rows[1]["gamma_dis"], rows[1]["gamma_abs"]);
}

#[test]
fn sweep_is_deterministic_and_sorted_regardless_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("s1.csv");
    let out4 = dir.path().join("s4.csv");
    for (out, workers) in [(&out1, "1"), (&out4, "4")] {
        run_ok(&[
            "sweep",
            "--sweep-alpha",
            "0.03,0.01",
            "--sweep-n",
            "8,4",
            "--t-max",
            "10",
            "--dt",
            "0.05",
            "--workers",
            workers,
            "--out",
            out.to_str().unwrap(),
        ]);
    }
    let b1 = std::fs::read(&out1).unwrap();
    assert_eq!(b1, std::fs::read(&out4).unwrap());
    let body = String::from_utf8(b1).unwrap();
    let keys: Vec<(u32, f64)> = body
        .lines()
        .skip(1)
        .map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            (c[0].parse().unwrap(), c[1].parse().unwrap())
        })
        .collect();
    assert_eq!(keys, vec![(4, 0.01), (4, 0.03), (8, 0.01), (8, 0.03)]);
}

#[test]
fn verify_reports_all_suites_and_exits_zero() {
    let out = spinbath(&[
        "verify", "--n-bath", "6", "--alpha", "0.1", "--seed", "7", "--t-max", "50",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(String::from_utf8(out.stdout).unwrap().trim()).unwrap();
    let suites = report.as_array().unwrap();
    assert!(suites.len() >= 10);
    for suite in suites {
        assert_eq!(suite["pass"], true, "failed suite: {suite}");
    }
}

#[test]
fn invalid_config_exits_nonzero_without_leaving_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never.csv");
    let r = spinbath(&[
        "trace",
        "--n-bath",
        "0",
        "--t-max",
        "1",
        "--dt",
        "0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(!r.status.success());
    assert!(!out.exists());
    assert_eq!(
        std::fs::read_dir(dir.path()).unwrap().count(),
        0,
        "no partial files"
    );

    // sweep requires non-empty axis lists
    let r = spinbath(&[
        "sweep",
        "--sweep-alpha",
        "0.01",
        "--t-max",
        "1",
        "--dt",
        "0.5",
    ]);
    assert!(!r.status.success());
}
