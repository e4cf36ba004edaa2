use std::path::Path;
use std::process::{Command, Output};

use harmonic_trees::cli::RunConfig;
use harmonic_trees::tree::EdgeRule;

fn bin(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_harmonic-trees"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn witness_x_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bin(&["witness-x", "--depth", "40", "--out", "run"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("run");
    let report: serde_json::Value = serde_json::from_str(&read(&dir, "witness-x.json")).unwrap();
    assert_eq!(report["schema"], "harmonic-trees/report/v1");
    assert_eq!(report["config_hash"].as_str().unwrap().len(), 64);
    let verdicts = report["result"]["certification"]["verdicts"].as_array().unwrap();
    assert_eq!(verdicts.len(), 3);
    let csv = read(&dir, "witness-x-target-1.csv");
    assert!(csv.starts_with("n,c_n,ratio,ratio_exact\n1,"));
    assert_eq!(csv.lines().count(), 41);

    let out = bin(
        &["certify", "--witness", "run/witness-x-witness.json", "--out", "again"],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let again: serde_json::Value = serde_json::from_str(&read(&tmp.path().join("again"), "certify.json")).unwrap();
    let (a, b) = (&again["result"]["certification"], &report["result"]["certification"]);
    assert_eq!(a["verdicts"], b["verdicts"]);
    for k in 0..3 {
        assert_eq!(a["targets"][k]["hits"], b["targets"][k]["hits"]);
        assert_eq!(a["targets"][k]["distances"], b["targets"][k]["distances"]);
    }
}

#[test]
fn repeated_runs_are_identical() {
    let tmp = tempfile::tempdir().unwrap();
    for d in ["a", "b"] {
        let out = bin(&["witness-ufm", "--depth", "60", "--seed", "7", "--out", d], tmp.path());
        assert!(out.status.success());
    }
    for name in ["witness-ufm.json", "witness-ufm-target-2.csv", "witness-ufm-witness.json"] {
        assert_eq!(read(&tmp.path().join("a"), name), read(&tmp.path().join("b"), name), "{name}");
    }
}

#[test]
fn bad_q_row_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = RunConfig::default();
    c.tree.depth = 6;
    c.tree.q = EdgeRule::PerLevel {
        rows: vec![vec!["1/2".into(), "1/3".into()]; 6],
    };
    std::fs::write(tmp.path().join("c.json"), c.to_json()).unwrap();
    let out = bin(&["build", "--config", "c.json"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "invalid_config");
    assert!(err["messages"][0].as_str().unwrap().contains("sum"));
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn unknown_fields_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let mut v = serde_json::to_value(RunConfig::default()).unwrap();
    v["bogus"] = 1.into();
    std::fs::write(tmp.path().join("c.json"), v.to_string()).unwrap();
    assert_eq!(bin(&["build", "--config", "c.json"], tmp.path()).status.code(), Some(1));
}

#[test]
fn shallow_tree_cannot_host_the_schedule() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bin(&["witness-x", "--depth", "6"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let out = bin(&["witness-ufm", "--depth", "40"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn float_mode_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bin(&["dense-family", "--mode", "float", "--depth", "20"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read(&tmp.path().join("out"), "dense-family.json");
    assert!(report.contains("\"mode\": \"float\""));
    let out = bin(&["certify", "--witness", "missing.json"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
}
