use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "data", name].iter().collect();
    p.display().to_string()
}

fn modprod(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modprod")).args(args).env_remove("MODPROD_DIGITS").output().unwrap()
}

fn report(args: &[&str]) -> Value {
    let out = modprod(args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn temp_file(name: &str, body: &str) -> String {
    let dir = std::env::temp_dir().join(format!("modprod-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.display().to_string()
}

fn all_passed(r: &Value) -> bool {
    r["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true)
}

#[test]
fn jproduct_embeds_the_j_identity() {
    let r = report(&["jproduct", "--prec", "6"]);
    assert!(all_passed(&r));
    let terms = r["outputs"]["product"]["series"]["terms"].as_array().unwrap();
    assert_eq!(terms[0], serde_json::json!(["-1", "1"]));
    assert_eq!(terms[2], serde_json::json!(["1", "196884"]));
    assert_eq!(r["outputs"]["exponents"]["1"], "-744");
}

#[test]
fn frame_shape_of_the_2a_traces() {
    let r = report(&["frame-shape", "--input", &data("th_248_2a.json")]);
    assert_eq!(r["outputs"]["frame_shape"], "1^-8 2^128");
    assert!(all_passed(&r));
}

#[test]
fn sq_on_the_theta_family() {
    let r = report(&["sq", "--input", &data("z2_theta.json"), "--prec", "10", "--character-table", &data("z2_characters.json")]);
    for c in ["1A", "2A"] {
        assert_eq!(r["outputs"]["traces"][c]["series"]["terms"], serde_json::json!([["0", "1"]]));
    }
    assert_eq!(r["outputs"]["decomposition"]["0"]["+"], "1");
}

#[test]
fn every_dataset_validates() {
    let dir: PathBuf = [env!("CARGO_MANIFEST_DIR"), "data"].iter().collect();
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path().display().to_string();
        let r = report(&["validate", "--input", &p]);
        assert!(all_passed(&r), "{p}");
    }
}

#[test]
fn validate_names_the_failing_check() {
    let asym = temp_file("asym.json", r#"{"index": 2, "classes": [{"name": "1A", "order": 1, "components": {"1": [["1", 1]]}}]}"#);
    let out = modprod(&["validate", "--input", &asym]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("symmetry"));

    let vb = temp_file(
        "vb.json",
        r#"{"index": 1, "classes": [
            {"name": "1A", "order": 1, "components": {"0": [["0", 1]]}},
            {"name": "2A", "order": 2, "powers": {"2": "1A"}, "components": {"0": [["0", 0]]}}]}"#,
    );
    let out = modprod(&["validate", "--input", &vb]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("v_b integrality"));

    let bad = temp_file("bad.json", r#"{"index": 1, "classes": [{"order": 1}]}"#);
    let out = modprod(&["validate", "--input", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("$.classes[0].name"));
}

#[test]
fn mismatched_engine_is_a_check_failure() {
    let out = modprod(&[
        "repackage",
        "--input",
        &data("theta_family.json"),
        "--engine",
        &data("z2_engine.json"),
        "--prec",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("engine matches family"));
}

#[test]
fn theta_family_rows() {
    let r = report(&["repackage", "--input", &data("theta_family.json"), "--engine", &data("theta_engine.json")]);
    let comps = r["outputs"]["check"]["components"].as_array().unwrap();
    let lead = |i: i64, j: i64| {
        let c = comps.iter().find(|c| c["i"] == i && c["j"] == j && c["r"] == 0).unwrap();
        c["series"]["terms"].as_array().unwrap().first().map(|t| t[1]["coeffs"]["0"].clone())
    };
    assert_eq!(lead(0, 0), Some(Value::String("120".into())));
    assert_eq!(lead(0, 1), Some(Value::String("128".into())));
    assert_eq!(lead(1, 0), Some(Value::String("-8".into())));
    assert_eq!(lead(1, 1), None);
}

#[test]
fn reports_are_deterministic() {
    let args = ["classnum", "--input", &data("th_2a_w.json")];
    let a = modprod(&args);
    let b = modprod(&args);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let keys: Vec<usize> = ["\"checks\"", "\"command\"", "\"inputs\"", "\"outputs\"", "\"version\""]
        .iter()
        .map(|k| text.find(k).unwrap())
        .collect();
    assert!(keys.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn csv_export() {
    let out = modprod(&["f0", "--prec", "6", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("label,exponent,coefficient"));
    assert_eq!(lines.next(), Some("f3,-3,1"));
    assert!(text.contains("f3,5,-85995"));
}

#[test]
fn digits_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_modprod"))
        .args(["trace", "--D1", "5", "--r1", "1", "--D0", "-3", "--mult", "3"])
        .env("MODPROD_DIGITS", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let r = report(&["trace", "--D1", "5", "--r1", "1", "--D0", "-3", "--mult", "3", "--digits", "30"]);
    let v = r["outputs"]["trace"]["value"].as_str().unwrap();
    assert!(v.starts_with("-257985.000000"), "{v}");
    assert!(r["outputs"]["trace"]["±"].is_string());
}

#[test]
fn replication_and_weil_checks() {
    let r = report(&["replication", "--disc", "-4", "--prec", "4", "--digits", "30", "--jobs", "2"]);
    assert!(all_passed(&r));
    let r = report(&["weil", "--m", "-2", "--n", "3", "--check"]);
    assert!(all_passed(&r));
    assert_eq!(r["outputs"]["dimension"], 36);
}

#[test]
fn input_errors_exit_two() {
    let out = modprod(&["sq", "--input", "/nonexistent.json"]);
    assert_eq!(out.status.code(), Some(2));
    let out = modprod(&["f0", "--prec", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = modprod(&["trace", "--D1", "3", "--r1", "1", "--D0", "-3"]);
    assert_eq!(out.status.code(), Some(2));
}
