use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sos_approx::approx::SosCertificate;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_sos-approx"));
    c.env_remove("SOS_APPROX_CONFIG");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}\nstderr: {}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const P31: &str = r#"{"flavor": "commutative", "n_vars": 3, "terms": [
  {"term": [2, 0, 0], "re": 1.0}, {"term": [0, 2, 0], "re": 1.0}, {"term": [0, 0, 2], "re": 1.0}]}"#;

// z1z1 + z1z2 + z2z1 + 2 z2z2, Gram [[1, 1], [1, 2]]
const FREE: &str = r#"{"flavor": "free", "n_vars": 2, "terms": [
  {"term": "z1 z1", "re": 1.0}, {"term": "z1 z2", "re": 1.0},
  {"term": "z2 z1", "re": 1.0}, {"term": "z2 z2", "re": 2.0}]}"#;

#[test]
fn sos_norm_of_p31_is_three() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "p31.json", P31);
    let out = run(&["sos-norm", "--input", input.to_str().unwrap()]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert!((v["value"].as_f64().unwrap() - 3.0).abs() < 1e-5);
    assert_eq!(v["status"], "Optimal");
    assert!(v["dual_bound"].as_f64().unwrap() <= v["value"].as_f64().unwrap() + 1e-9);
}

#[test]
fn free_sos_norm_is_the_diagonal_word_sum() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "free.json", FREE);
    let doc: Value = serde_json::from_str(FREE).unwrap();
    // words of the form w*w with |w| = 1 are the repeated letters
    let expected: f64 = doc["terms"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|t| {
            let letters: Vec<&str> = t["term"].as_str().unwrap().split_whitespace().collect();
            letters[0] == letters[1]
        })
        .map(|t| t["re"].as_f64().unwrap())
        .sum();
    let out = run(&["sos-norm", "--input", input.to_str().unwrap()]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["method"], "closed-form (free)");
    assert!((v["value"].as_f64().unwrap() - expected).abs() < 1e-12);
}

#[test]
fn empty_polynomial_has_norm_zero() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "zero.json", r#"{"flavor": "commutative", "n_vars": 2, "terms": []}"#);
    let out = run(&["sos-norm", "--input", input.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["value"].as_f64().unwrap(), 0.0);
}

#[test]
fn approx_writes_a_verifiable_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let cert_path = dir.path().join("cert.json");
    let out = run(&["approx", "--n", "3", "--d", "2", "--eps", "0.5", "--output", cert_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let cert = SosCertificate::<f64>::from_json(&std::fs::read_to_string(&cert_path).unwrap()).unwrap();
    cert.verify().unwrap();
    assert!(cert.len() as f64 <= (cert.sos_norm / 0.5).floor());
    assert!(cert.error <= 0.5);
    let summary = stdout_json(&out);
    assert_eq!(summary["squares"].as_u64().unwrap() as usize, cert.len());
}

#[test]
fn exact_square_needs_one_square() {
    let dir = tempfile::tempdir().unwrap();
    // (x1 + x2)²
    let input = write(
        dir.path(),
        "sq.json",
        r#"{"flavor": "commutative", "n_vars": 2, "terms": [
          {"term": [2, 0], "re": 1.0}, {"term": [1, 1], "re": 2.0}, {"term": [0, 2], "re": 1.0}]}"#,
    );
    let out = run(&["approx", "--input", input.to_str().unwrap(), "--eps", "0.1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let cert = SosCertificate::<f64>::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(cert.len(), 1);
    assert!(cert.error < 1e-9, "{}", cert.error);
}

#[test]
fn zero_epsilon_is_a_usage_error_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("cert.json");
    let out = run(&["approx", "--eps", "0", "--output", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!target.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn parse_errors_exit_2_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "bad.json", "{\"flavor\": \"commutative\",\n \"n_vars\": 2, \"terms\": [}");
    let out = run(&["sos-norm", "--input", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn infeasible_input_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // x1² − x2² is negative at (0, 1)
    let input = write(
        dir.path(),
        "neg.json",
        r#"{"flavor": "commutative", "n_vars": 2, "terms": [{"term": [2, 0], "re": 1.0}, {"term": [0, 2], "re": -1.0}]}"#,
    );
    let path = input.to_str().unwrap();
    let out = run(&["feasible", "--input", path]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stdout_json(&out)["feasible"], false);
    assert_eq!(run(&["sos-norm", "--input", path]).status.code(), Some(3));
    assert_eq!(run(&["approx", "--input", path, "--eps", "0.1"]).status.code(), Some(3));
    let ok = run(&["feasible"]);
    assert!(ok.status.success());
    assert_eq!(stdout_json(&ok)["feasible"], true);
}

#[test]
fn figure_csv_contract() {
    let out = run(&["figure", "--d-max", "4", "--jobs", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "d,sos_norm,sqrt_dim_bound,identity_trace");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 4);
    assert!((rows[0][1] - 3.0).abs() < 1e-5);
    assert!((rows[0][2] - 6f64.sqrt()).abs() < 1e-12);
    assert!((rows[1][2] - 15f64.sqrt()).abs() < 1e-12);
    for (i, r) in rows.iter().enumerate() {
        let d = i + 1;
        assert_eq!(r[0], d as f64);
        // C(d+2, 2)
        assert_eq!(r[3], ((d + 2) * (d + 1) / 2) as f64);
        assert!(r[1] <= r[3] + 1e-6);
        if d >= 2 {
            assert!(r[1] <= r[2]);
        }
    }
    let serial = run(&["figure", "--d-max", "4", "--jobs", "1"]);
    assert_eq!(String::from_utf8(serial.stdout).unwrap(), text);
}

#[test]
fn figure_range_is_gated() {
    assert_eq!(run(&["figure", "--d-max", "9"]).status.code(), Some(2));
}

#[test]
fn outputs_are_deterministic() {
    let a = run(&["approx", "--d", "2", "--eps", "0.3"]);
    let b = run(&["approx", "--d", "2", "--eps", "0.3"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn bounds_report() {
    let out = run(&["bounds", "--n", "3", "--d", "2", "--eps", "0.5", "--sos-norm", "3"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["dim_vv"], 15);
    assert_eq!(v["pythagoras_bound"], 4);
    assert_eq!(v["approximate_cap"], 5);
    assert_eq!(run(&["bounds", "--d", "2"]).status.code(), Some(2));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.conf", "# test\nd = 2\nn = 2\n");
    let out = bin().env("SOS_APPROX_CONFIG", &cfg).args(["sos-norm", "--d", "1"]).output().unwrap();
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["d"], 1);
    assert_eq!(v["n"], 2);
    let bad = write(dir.path(), "bad.conf", "n = 2\ncolour = blue\n");
    let out = bin().env("SOS_APPROX_CONFIG", &bad).args(["sos-norm"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn verify_default_seed_passes() {
    let out = run(&["verify"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let lines: Vec<Value> =
        String::from_utf8(out.stdout).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(!lines.is_empty());
    assert!(lines.iter().all(|l| l["passed"] == true));
    let sphere = lines.iter().find(|l| l["property"] == "monomial-vector-on-sphere").unwrap();
    assert!(sphere["max_value"].as_f64().unwrap() <= 1.0 + 1e-12);
}
