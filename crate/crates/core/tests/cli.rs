//! End-to-end tests of the `vopkit` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn vopkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vopkit"))
        .args(args)
        .env_remove("VOPKIT_MAX_ORDER")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn entry<'a>(doc: &'a Value, name: &str) -> Option<&'a Value> {
    doc["ledger"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["name"] == name)
}

#[test]
fn gen_charlier_example() {
    let out = vopkit(&["gen", "--kind", "charlier-appell", "--P", "-1", "--nmax", "4", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["members"][2], serde_json::json!(["1", "-3", "1"]));
    assert_eq!(doc["members"].as_array().unwrap().len(), 5);
    assert_eq!(doc["eigenvalues"], serde_json::json!(["0", "-1", "-2", "-3", "-4"]));
    for key in ["spec", "members", "tildeL", "eigenvalues", "ledger"] {
        assert!(doc.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn gen_single_member() {
    let out = vopkit(&["gen", "--a", "3", "--nmax", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["members"], serde_json::json!([["1"]]));
}

#[test]
fn gen_meixner_affine_spectrum() {
    let out = vopkit(&[
        "gen", "--kind", "meixner-type", "--P", "0,1/2", "--beta", "1", "--c", "1/2", "--nmax", "6",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    let eigs: Vec<&str> = doc["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(eigs, ["0", "-1/2", "-1", "-3/2", "-2", "-5/2", "-3"]);
    assert_eq!(doc["members"].as_array().unwrap().len(), 7);
}

#[test]
fn output_is_deterministic() {
    let args = ["check", "all", "--kind", "meixner-type", "--P", "1,-2", "--beta", "2", "--c", "1/3", "--nmax", "6"];
    let a = vopkit(&args);
    let b = vopkit(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn check_all_charlier_reports_errata() {
    let out = vopkit(&["check", "all", "--a", "1", "--nmax", "10"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&out);
    for name in ["eigen", "lowering", "recursion", "orthogonality", "closed-forms", "degeneracy"] {
        let e = entry(&doc, name).unwrap_or_else(|| panic!("{name} missing"));
        assert_eq!(e["status"], "pass");
        let count = doc["ledger"].as_array().unwrap().iter().filter(|e| e["name"] == name).count();
        assert_eq!(count, 1);
    }
    assert_eq!(entry(&doc, "erratum:eigenvalue-sign").unwrap()["status"], "erratum");
    assert_eq!(entry(&doc, "erratum:inverse-conjugation").unwrap()["status"], "erratum");
    assert_eq!(doc["constants"]["eigenvalue_slope"], "-1");
    assert_eq!(doc["constants"]["band_depth"], 1);
}

#[test]
fn corrupted_tilde_l_fails() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("family.json");
    let out = vopkit(&["gen", "--a", "1", "--nmax", "5", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();

    let ok = vopkit(&["check", "eigen", "--input", path.to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0));

    doc["tildeL"]["1"] = serde_json::json!(["2"]);
    std::fs::write(&path, doc.to_string()).unwrap();
    let bad = vopkit(&["check", "eigen", "--input", path.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&bad.stderr);
    assert!(stderr.contains("not an eigenfunction"), "{stderr}");
}

#[test]
fn kravchuk_degeneracy_check() {
    let out = vopkit(&[
        "check", "degeneracy", "--kind", "meixner-type", "--P", "1,1", "--beta", "-5", "--c", "1/2",
        "--nmax", "8",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&out);
    assert_eq!(doc["constants"]["degeneracy_indices"][0], serde_json::json!([5, 3]));
    let details = entry(&doc, "degeneracy").unwrap()["details"].as_str().unwrap().to_string();
    assert!(details.contains("n = 5"), "{details}");
}

#[test]
fn classical_commands() {
    assert_eq!(vopkit(&["classical", "--a", "2", "--nmax", "8"]).status.code(), Some(0));
    assert_eq!(vopkit(&["classical", "--a", "0"]).status.code(), Some(2));
    let out = vopkit(&["classical", "--kind", "meixner-type", "--beta", "3", "--c", "1/3", "--nmax", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["constants"]["proportionality_scalar"], "1/3");
    assert_eq!(doc["constants"]["fitted_beta"], "4");
    assert_eq!(doc["constants"]["fitted_c"], "-1");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(vopkit(&["gen", "--P", "1/0"]).status.code(), Some(2));
    assert_eq!(vopkit(&["gen", "--format", "yaml", "--a", "1"]).status.code(), Some(2));
    assert_eq!(vopkit(&["check", "bogus", "--a", "1"]).status.code(), Some(2));
    assert_eq!(vopkit(&["gen", "--kind", "meixner-type", "--P", "1", "--beta", "1", "--c", "1"]).status.code(), Some(2));
    assert_eq!(vopkit(&["check", "--input", "/nonexistent/family.json"]).status.code(), Some(2));
}

#[test]
fn max_order_env_guard() {
    let out = Command::new(env!("CARGO_BIN_EXE_vopkit"))
        .args(["gen", "--kind", "meixner-type", "--P", "1,1", "--beta", "1", "--c", "1/2"])
        .env("VOPKIT_MAX_ORDER", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let bad = Command::new(env!("CARGO_BIN_EXE_vopkit"))
        .args(["gen", "--a", "1"])
        .env("VOPKIT_MAX_ORDER", "many")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn csv_and_text_formats() {
    let out = vopkit(&["gen", "--a", "1", "--nmax", "2", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "n,c_0,c_1,c_2\n0,1,0,0\n1,-1,1,0\n2,1,-3,1\n");
    let out = vopkit(&["check", "lowering", "--a", "1", "--nmax", "3", "--format", "text"]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("[PASS] lowering"));
    assert!(Path::new(env!("CARGO_BIN_EXE_vopkit")).exists());
}
