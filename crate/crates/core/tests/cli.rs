//! End-to-end runs of the `steklov` binary.

mod common;

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn steklov(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_steklov")).args(args).current_dir(dir).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn spectrum_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let o = steklov(dir.path(), &["spectrum", "--quadratic", "3", "--n", "64", "--output-dir", "out"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read_json(&dir.path().join("out/spectrum.json"));
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["convergence_warning"], false);
    let l1 = doc["pairs"][0]["lambda"].as_f64().unwrap();
    let golden = common::quadratic_lambda(3.0, 1);
    assert!((l1 - golden).abs() < 1e-6 * golden);

    let csv = std::fs::read_to_string(dir.path().join("out/eigenfunctions.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("x,u_1"));
    assert_eq!(lines.count(), 201);
}

#[test]
fn output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let o = steklov(dir.path(), &["spectrum", "--ps3-a", "5", "--n", "32", "--output-dir", out]);
        assert_eq!(code(&o), 0);
    }
    for f in ["spectrum.json", "eigenfunctions.csv"] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs");
    }
}

#[test]
fn spectrum_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    // x² has its critical point at 0, inside [−1, 1]
    let o = steklov(dir.path(), &["spectrum", "--map", r#"{"num":[0,0,1],"den":[1]}"#]);
    assert_eq!(code(&o), 2);
    assert!(!o.stderr.is_empty());

    let o = steklov(dir.path(), &["spectrum", "--ps3-a", "2", "--window", "-0.1,0.5"]);
    assert_eq!(code(&o), 2);
    let o = steklov(dir.path(), &["spectrum", "--ps3-a", "2", "--lambda-range", "1.1"]);
    assert_eq!(code(&o), 2);
    let o = steklov(dir.path(), &["spectrum", "--quadratic", "3", "--n", "2"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn coarse_truncation_warns() {
    let dir = tempfile::tempdir().unwrap();
    let o = steklov(dir.path(), &["spectrum", "--ps3-a", "5", "--n", "4", "--output-dir", "o"]);
    assert_eq!(code(&o), 0);
    assert_eq!(read_json(&dir.path().join("o/spectrum.json"))["convergence_warning"], true);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.json"),
        r#"{"command": "spectrum", "quadratic": 2.0, "n": 16, "output_dir": "cfg"}"#,
    )
    .unwrap();
    let o = steklov(dir.path(), &["spectrum", "--config", "run.json", "--n", "24"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read_json(&dir.path().join("cfg/spectrum.json"));
    assert_eq!(doc["n"], 24);

    std::fs::write(dir.path().join("bad.json"), r#"{"quadratic": 2.0, "bogus": 1}"#).unwrap();
    let o = steklov(dir.path(), &["spectrum", "--config", "bad.json"]);
    assert_eq!(code(&o), 2);
    std::fs::write(dir.path().join("neg.json"), r#"{"quadratic": 2.0, "tolerances": {"converged_gap": -1}}"#).unwrap();
    let o = steklov(dir.path(), &["spectrum", "--config", "neg.json"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn analyze_passes_and_detects_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let o = steklov(dir.path(), &["spectrum", "--ps3-a", "5", "--n", "64", "--output-dir", "s"]);
    assert_eq!(code(&o), 0);
    let o = steklov(dir.path(), &["analyze", "--spectrum", "s/spectrum.json", "--output-dir", "s"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read_json(&dir.path().join("s/analysis.json"));
    assert_eq!(doc["schema"], 1);
    let entries = doc["pairs"].as_array().expect("pairs array");
    assert!(!entries.is_empty());
    let anti: Vec<&Value> = entries.iter().filter(|e| e["analysis"]["symmetry"] == "antisymmetric").collect();
    assert!(!anti.is_empty());
    for e in &anti {
        let a = &e["analysis"];
        assert_eq!(a["observed_zeros"].as_u64().unwrap(), a["m"].as_u64().unwrap() + 1);
        assert!(a["sewing"]["fashion"].is_string());
    }
    for e in entries.iter().filter(|e| e["analysis"]["symmetry"] == "symmetric") {
        assert!(e["analysis"]["winding"].is_null());
    }

    let mut spec = read_json(&dir.path().join("s/spectrum.json"));
    let coeffs = spec["pairs"][0]["coefficients"].as_array_mut().unwrap();
    coeffs[1] = Value::from(coeffs[1].as_f64().unwrap() + 0.3);
    std::fs::write(dir.path().join("bad.json"), spec.to_string()).unwrap();
    let o = steklov(dir.path(), &["analyze", "--spectrum", "bad.json", "--output-dir", "bad"]);
    assert_eq!(code(&o), 4);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("kappa_constancy"), "{err}");
}

#[test]
fn reconstruct_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = steklov(dir.path(), &["reconstruct", "--a", "5", "--output-dir", "r"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let map = read_json(&dir.path().join("r/map.json"));
    assert_eq!(map["schema"], 1);
    let report = read_json(&dir.path().join("r/reconstruction.json"));
    assert!(report["max_error"].as_f64().unwrap() < 1e-9);

    let o = steklov(dir.path(), &["reconstruct", "--a", "0.5"]);
    assert_eq!(code(&o), 2);

    let bp = [-3.2, -1.5, 2.0, 6.0];
    let o = steklov(dir.path(), &["reconstruct", "--branch-points", "-3.2,-1.5,2.0,6.0", "--output-dir", "b"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(&dir.path().join("b/reconstruction.json"));
    let pants = &report["pants"];
    let got = [
        pants["blue"]["lo"].as_f64().unwrap(),
        pants["blue"]["hi"].as_f64().unwrap(),
        pants["green"]["lo"].as_f64().unwrap(),
        pants["green"]["hi"].as_f64().unwrap(),
    ];
    for (g, w) in got.iter().zip(bp) {
        assert!((g - w).abs() < 1e-8, "{got:?}");
    }
    let o = steklov(dir.path(), &["reconstruct", "--branch-points", "1,2,3"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn pants_moduli_prints_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let o = steklov(dir.path(), &["pants-moduli", "--ps3-a", "5", "--lambda", "1.5", "--output-dir", "p"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let printed: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(printed, read_json(&dir.path().join("p/pants.json")));
    assert_eq!(printed["moduli"].as_array().unwrap().len(), 3);
    assert_eq!(printed["certificate_positive"], true);
}

#[test]
fn validate_quadratic_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = steklov(dir.path(), &["validate-quadratic", "--quadratic", "3", "--n", "64"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "n,lambda_closed_form,lambda_solver,rel_error");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 4);
    for r in rows {
        assert!((r[1] - common::quadratic_lambda(3.0, r[0] as usize)).abs() < 1e-12);
        assert!(r[3] < 1e-6);
    }
}

#[test]
fn selfcheck_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = steklov(dir.path(), &["monodromy-selfcheck"]);
    assert_eq!(code(&o), 0);
    let o = steklov(dir.path(), &["monodromy-selfcheck", "--inject-sign-error"]);
    assert_eq!(code(&o), 4);
    let o = steklov(dir.path(), &["monodromy-selfcheck", "--lambdas", "1.5,3,2.5"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("skipped lambda = 3"));
}
