//! Exit codes and output formats of the `cgfa` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn models() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn cgfa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cgfa"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn model(name: &str) -> String {
    models().join(name).to_string_lossy().into_owned()
}

fn write_model(dir: &tempfile::TempDir, text: &str) -> String {
    let path = dir.path().join("m.cgf");
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn check_reports_termination_one() {
    let out = cgfa(&["check", &model("groupies.cgf"), "--format", "json"]);
    let doc = json(&out);
    assert_eq!(doc["mode"], "concrete");
    assert_eq!(doc["states"].as_array().unwrap().len(), 4);
    let p: f64 = doc["termination"]["initial"]["decimal"]
        .as_str()
        .unwrap()
        .parse()
        .unwrap();
    assert!((p - 1.0).abs() < 1e-9);
    let text = cgfa(&["check", &model("groupies.cgf")]);
    assert!(text.status.success());
    assert!(String::from_utf8_lossy(&text.stdout).contains("termination at initial:"));
}

#[test]
fn abstract_reports_bounds() {
    let doc = json(&cgfa(&[
        "abstract",
        &model("groupies_family.cgf"),
        "--format",
        "json",
    ]));
    assert_eq!(doc["mode"], "abstract");
    assert_eq!(doc["states"].as_array().unwrap().len(), 7);
    assert_eq!(doc["fallback_used"], false);
    for end in doc["termination"]["initial"].as_array().unwrap() {
        let v: f64 = end["decimal"].as_str().unwrap().parse().unwrap();
        assert!((v - 1.0).abs() < 1e-9);
    }
    let plain = json(&cgfa(&[
        "abstract",
        &model("groupies_family.cgf"),
        "--no-widening",
        "--format",
        "json",
    ]));
    assert_eq!(plain["config"]["widening"], false);
    assert_eq!(plain["states"].as_array().unwrap().len(), 16);
}

#[test]
fn tiny_enum_cap_flags_fallback_and_still_encloses() {
    let doc = json(&cgfa(&[
        "abstract",
        &model("groupies_family.cgf"),
        "--enum-cap",
        "1",
        "--format",
        "json",
    ]));
    assert_eq!(doc["fallback_used"], true);
    let ends: Vec<f64> = doc["termination"]["initial"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["decimal"].as_str().unwrap().parse().unwrap())
        .collect();
    assert!(0.0 <= ends[0] && ends[0] <= 1.0 + 1e-9 && ends[1] >= 1.0 - 1e-9);
}

#[test]
fn export_dot_stages() {
    let alts = cgfa(&[
        "export",
        &model("groupies_family.cgf"),
        "--format",
        "dot",
        "--stage",
        "alts",
    ]);
    assert!(alts.status.success());
    let text = String::from_utf8_lossy(&alts.stdout);
    assert!(
        text.starts_with("digraph alts {") && text.contains("(lam,mu) | ([1,2],[1,1]) | 1"),
        "{text}"
    );
    let imc = cgfa(&[
        "export",
        &model("groupies_family.cgf"),
        "--format",
        "dot",
        "--stage",
        "imc",
    ]);
    assert!(String::from_utf8_lossy(&imc.stdout).contains("| [1/2,1/2]"));
    let lts = cgfa(&[
        "export",
        &model("groupies.cgf"),
        "--format",
        "dot",
        "--stage",
        "lts",
    ]);
    assert!(String::from_utf8_lossy(&lts.stdout).starts_with("digraph lts {"));
}

#[test]
fn export_writes_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("out.json");
    let out = cgfa(&[
        "export",
        &model("groupies_family.cgf"),
        "--output",
        target.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(target).unwrap()).unwrap();
    assert_eq!(doc["config"]["stage"], "bounds");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_model(&dir, "species X = ?a 1).X\ninit X:1\n");
    let out = cgfa(&["check", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("1:16"));

    let divergent = write_model(&dir, "species X = tau(1).X | X\ninit X:1\n");
    assert_eq!(
        cgfa(&["check", &divergent, "--state-cap", "100"])
            .status
            .code(),
        Some(2)
    );

    assert_eq!(
        cgfa(&["check", &model("groupies_family.cgf")])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        cgfa(&["check", "/nonexistent/model.cgf"]).status.code(),
        Some(1)
    );
    assert_eq!(
        cgfa(&["export", &model("groupies.cgf"), "--stage", "nope"])
            .status
            .code(),
        Some(64)
    );
    assert_eq!(cgfa(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(cgfa(&["--help"]).status.code(), Some(0));
    assert_eq!(cgfa(&["--version"]).status.code(), Some(0));
}
