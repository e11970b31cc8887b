use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn crepant(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crepant"))
        .args(args)
        .env_remove("CREPANT_OUTPUT_DIR")
        .env_remove("CREPANT_WORKERS")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn cartan_matrix_for_n4() {
    let out = crepant(&["pairing", "--n", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["pass"], true);
    let want = serde_json::json!([[-2.0, 1.0, 0.0], [1.0, -2.0, 1.0], [0.0, 1.0, -2.0]]);
    assert_eq!(v["data"]["cartan_matrix"], want);
}

#[test]
fn degree_zero_iseries_is_the_skeleton() {
    let out = crepant(&["iseries", "--side", "X", "--n", "2", "--degree", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let rows = v["data"]["i_function"]["rows"].as_array().unwrap();
    for (p, row) in rows.iter().enumerate() {
        for (k, s) in row.as_array().unwrap().iter().enumerate() {
            let terms = s["terms"].as_array().unwrap();
            if p == 0 && k == 0 {
                assert_eq!(terms.len(), 1);
                assert_eq!(terms[0]["re"], 1.0);
            } else {
                assert!(terms.is_empty(), "row {p} entry {k}");
            }
        }
    }
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["pairing", "--precision", "binary128"][..],
        &["continue-roots", "--steps", "50"],
        &["pairing", "--n", "1"],
        &["no-such-command"],
    ] {
        let out = crepant(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "n = 3\nbogus = 1\n").unwrap();
    let out = crepant(&["pairing", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let a = crepant(&["products", "--n", "2", "--seed", "7"]);
    let b = crepant(&["products", "--n", "2", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "n = 3\nseed = 4\nlambda = [[0.5, 1.5]]\n\n[tolerances]\npairing = 1e-9\n",
    )
    .unwrap();
    let out = crepant(&["pairing", "--config", cfg.to_str().unwrap(), "--n", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["config"]["n"], 5);
    assert_eq!(v["config"]["seed"], 4);
    assert_eq!(v["config"]["tolerances"]["pairing"], 1e-9);
    assert_eq!(v["data"]["cartan_matrix"].as_array().unwrap().len(), 4);
}

#[test]
fn artifacts_land_in_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_crepant"))
        .args(["continue-roots", "--n", "3", "--steps", "200"])
        .env("CREPANT_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("continue-roots.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    let mut rdr = csv::Reader::from_path(dir.path().join("trajectories.csv")).unwrap();
    assert!(rdr.records().count() > 400);
}

#[test]
fn verify_crc_outcomes() {
    let ok = crepant(&["verify-crc", "--n", "2", "--degree", "12", "--steps", "2000"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(json(&ok)["pass"], true);
    let bad = crepant(&["verify-crc", "--n", "6"]);
    assert_eq!(bad.status.code(), Some(1));
    let v = json(&bad);
    let offset = v["checks"].as_array().unwrap().iter().find(|c| c["name"] == "offset_defect").unwrap();
    assert_eq!(offset["pass"], false);
}

#[test]
fn corollary_for_n2() {
    let out = crepant(&["corollary-check", "--n", "2", "--lambda", "0.7,-1.3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}
