use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn graphpack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graphpack")).args(args).output().unwrap()
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn pack_then_verify_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("trees_n200.json");
    let instances = dir.path().join("instances");
    let out = graphpack(&["generate", "--config", s(&cfg), "--out", s(&instances)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let report = dir.path().join("report.json");
    let dump = dir.path().join("embeddings.txt");
    let csv = dir.path().join("run.csv");
    let out = graphpack(&[
        "pack", "--config", s(&cfg), "--seed", "0", "--report", s(&report), "--embeddings", s(&dump), "--csv", s(&csv),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["valid"], true);
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 2);

    let out = graphpack(&["verify", "--instances", s(&instances), "--embeddings", s(&dump)]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["valid"], true);

    // swap two images of the first guest so some edge lands twice
    let text = std::fs::read_to_string(&dump).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let second = lines[1].clone();
    lines[0] = format!("0:{}", second.split_once(':').unwrap().1);
    std::fs::write(&dump, lines.join("\n")).unwrap();
    let out = graphpack(&["verify", "--instances", s(&instances), "--embeddings", s(&dump)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn failed_packing_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("trees_n200.json")).unwrap();
    let mut cfg: serde_json::Value = serde_json::from_str(&text).unwrap();
    cfg["constants"]["p0"] = serde_json::json!(0.97);
    cfg["retries"] = serde_json::json!({"run": 0, "layer": 0});
    let path = dir.path().join("bad.json");
    std::fs::write(&path, cfg.to_string()).unwrap();
    let out = graphpack(&["pack", "--config", s(&path)]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["failure"]["phase"].is_string());
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("typo.json");
    std::fs::write(&path, r#"{"n": 50, "epsilonn": 0.3, "family": {"kind": "trees", "count": 3}}"#).unwrap();
    assert_eq!(graphpack(&["pack", "--config", s(&path)]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(graphpack(&["pack", "--config", s(&missing)]).status.code(), Some(2));
    assert_eq!(
        graphpack(&["resilience", "--n", "10", "--p", "1.5", "--trials", "1"]).status.code(),
        Some(2)
    );
}

#[test]
fn bench_writes_one_row_per_seed() {
    let out = graphpack(&["bench", "--config", s(&config("trees_n200.json")), "--seeds", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 4);
}

#[test]
fn resilience_prints_csv() {
    let out = graphpack(&["resilience", "--n", "30", "--p", "0.5", "--trials", "5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 6);
}
