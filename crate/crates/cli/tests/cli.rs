use std::process::{Command, Output};

use orbitdp_core::{io, HermitianMatrix};

fn orbitdp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orbitdp")).args(args).output().unwrap()
}

fn code(args: &[&str]) -> i32 {
    orbitdp(args).status.code().unwrap()
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["--version"]), 0);
    assert_eq!(code(&[]), 1);
    assert_eq!(code(&["frobnicate"]), 1);
    assert_eq!(code(&["bounds", "--gamma", "1,0"]), 1);
    assert_eq!(code(&["--format", "xml", "selftest"]), 1);
    assert_eq!(code(&["bounds", "--gamma", "1,x", "--lambda", "1,0", "--k", "1", "--eps", "1"]), 1);
}

#[test]
fn validation_errors_exit_2() {
    assert_eq!(code(&["bounds", "--gamma", "1,0", "--lambda", "1,0", "--k", "1", "--eps", "0"]), 2);
    assert_eq!(code(&["bounds", "--gamma", "1,0", "--lambda", "1,0.5,0", "--k", "1", "--eps", "1"]), 2);
    assert_eq!(code(&["privatize", "--in", "/nonexistent/m.json", "--k", "1", "--eps", "1"]), 2);
    assert_eq!(code(&["pack", "--lambda", "1,1", "--i", "1", "--j", "2", "--zeta", "0.1"]), 2);
    assert_eq!(code(&["--format", "csv", "cover", "--lambda", "1,0", "--zeta", "0.5"]), 2);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"dim": 2, "re": [[1, 2], [0, 1]], "im": [[0, 0], [0, 0]]}"#).unwrap();
    let out = orbitdp(&["privatize", "--in", bad.to_str().unwrap(), "--k", "1", "--eps", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn strict_flags_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    io::write_matrix(&path, &HermitianMatrix::from_real_diagonal(&[0.2, 0.1, 0.0])).unwrap();
    let p = path.to_str().unwrap();
    // A nearly flat target: the chain accepts almost every proposal.
    let args = ["sample-orbit", "--in", p, "--lambda", "1,0.5", "--eps", "0.01", "--chain-length", "3000", "--burn-in", "1000"];
    let relaxed = orbitdp(&args);
    assert_eq!(relaxed.status.code(), Some(0));
    let body: serde_json::Value = serde_json::from_slice(&relaxed.stdout).unwrap();
    assert!(!body["flags"].as_array().unwrap().is_empty());

    let mut strict = vec!["--strict"];
    strict.extend_from_slice(&args);
    assert_eq!(code(&strict), 3);
}

#[test]
fn bounds_example_reports_tau() {
    let out = orbitdp(&["--quiet", "bounds", "--gamma", "3,2,1,0", "--lambda", "3,2,1,0", "--k", "2", "--eps", "1", "--beta", "0.1"]);
    assert!(out.status.success());
    assert!(out.stderr.is_empty());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["upper_utility_bound"].as_f64().unwrap() - 767.923928).abs() < 1e-6);

    let table = orbitdp(&["--quiet", "bounds", "--gamma", "3,2,1,0", "--lambda", "3,2,1,0", "--k", "2", "--eps", "1", "--table"]);
    assert!(String::from_utf8(table.stdout).unwrap().contains("upper_utility_bound"));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cover.json");
    let out = orbitdp(&["--quiet", "--out", path.to_str().unwrap(), "cover", "--lambda", "1,0", "--zeta", "0.5"]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(v["count"].as_u64().unwrap() >= 2);
}

#[test]
fn bench_spec_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(
        &spec,
        r#"{"scenario": "projection", "d": 3, "k": 1, "epsilon": 1.0, "beta": 0.1, "trials": 8, "seed": 4,
            "output_path": "ignored-when-out-is-set.csv"}"#,
    )
    .unwrap();
    let csv = dir.path().join("trials.csv");
    let out = orbitdp(&["--quiet", "--format", "csv", "--out", csv.to_str().unwrap(), "bench", "--spec", spec.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("trial,utility,utility_gap,frob_err_sq,lambda_tilde_1,"));
    assert_eq!(text.lines().count(), 9);
}
