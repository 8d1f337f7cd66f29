use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn forge(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_forge"))
        .args(args)
        .current_dir(dir)
        .env_remove("FORGE_WORKERS")
        .output()
        .expect("forge runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const C6: &str = "BIPARTITE 3 3 6\n0 0\n0 1\n1 1\n1 2\n2 2\n2 0\nMANIFEST -\n";

#[test]
fn construct_writes_graph_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("r.json"), r#"{"kind": "dkq", "k": 5, "q": 3, "output": "out/d53.graph"}"#).unwrap();
    let o = forge(dir.path(), &["construct", "r.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("out/d53.graph")).unwrap();
    assert!(text.starts_with("BIPARTITE 243 243 729\n"));
    let manifest: Value = serde_json::from_slice(&fs::read(dir.path().join("out/d53.graph.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["left_degree"], 3);
    assert!(stdout(&o).contains("checksum"));
}

#[test]
fn construct_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("r.json"),
        r#"{"kind": "gadget", "n1": 12, "n2": 12, "d1": 3, "d2": 3, "C": 1.0, "delta": 0.8, "seed": 4, "output": "g.graph"}"#,
    )
    .unwrap();
    let mut runs = Vec::new();
    for _ in 0..2 {
        assert_eq!(forge(dir.path(), &["construct", "r.json"]).status.code(), Some(0));
        runs.push((fs::read(dir.path().join("g.graph")).unwrap(), fs::read(dir.path().join("g.graph.manifest.json")).unwrap()));
    }
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn verify_girth_passes_on_c6() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c6.graph"), C6).unwrap();
    fs::write(dir.path().join("a.json"), r#"{"audits": [{"kind": "girth", "min": 6}, {"kind": "biregular", "left": 2, "right": 2}]}"#).unwrap();
    let o = forge(dir.path(), &["verify", "c6.graph", "a.json"]);
    assert_eq!(o.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&fs::read(dir.path().join("c6.graph.report.json")).unwrap()).unwrap();
    assert_eq!(report["audits"][0]["detail"]["value"], 6);
    assert_eq!(report["pass"], true);
}

#[test]
fn failed_audit_exits_one_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    // C6 with one edge rerouted into a double edge
    let corrupted = C6.replace("1 2\n", "1 1\n");
    fs::write(dir.path().join("bad.graph"), corrupted).unwrap();
    fs::write(
        dir.path().join("a.json"),
        r#"{"audits": [{"kind": "expansion", "side": "left", "max_size": 2,
            "threshold": {"kind": "unique-neighbor-count", "min": 2}}], "report": "out.json"}"#,
    )
    .unwrap();
    let o = forge(dir.path(), &["verify", "bad.graph", "a.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL witness"), "{}", stdout(&o));
    let report: Value = serde_json::from_slice(&fs::read(dir.path().join("out.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], false);
}

#[test]
fn bad_inputs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c6.graph"), C6).unwrap();
    fs::write(dir.path().join("junk.json"), "{not json").unwrap();
    fs::write(dir.path().join("bad.json"), r#"{"kind": "dkq", "k": 1, "q": 4, "output": "x.graph"}"#).unwrap();
    fs::write(dir.path().join("broken.graph"), "BIPARTITE 2 2 3\n0 0\n").unwrap();
    fs::write(dir.path().join("a.json"), r#"{"audits": [{"kind": "girth"}]}"#).unwrap();
    for args in [
        vec!["construct", "junk.json"],
        vec!["construct", "bad.json"],
        vec!["construct", "missing.json"],
        vec!["verify", "c6.graph", "junk.json"],
        vec!["verify", "broken.graph", "a.json"],
        vec!["pipeline", "junk.json"],
        vec!["frobnicate"],
    ] {
        let o = forge(dir.path(), &args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn worker_count_variable() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c6.graph"), C6).unwrap();
    fs::write(dir.path().join("a.json"), r#"{"audits": [{"kind": "girth", "min": 6}]}"#).unwrap();
    let run = |workers: &str| {
        Command::new(env!("CARGO_BIN_EXE_forge"))
            .args(["verify", "c6.graph", "a.json"])
            .current_dir(dir.path())
            .env("FORGE_WORKERS", workers)
            .output()
            .unwrap()
            .status
            .code()
    };
    assert_eq!(run("1"), Some(0));
    assert_eq!(run("3"), Some(0));
    assert_eq!(run("many"), Some(2));
}

#[test]
fn pipeline_writes_bundle() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("p.json"), r#"{"kind": "lps", "p": 5, "q": 13, "output": "bundle"}"#).unwrap();
    let o = forge(dir.path(), &["pipeline", "p.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: Value = serde_json::from_slice(&fs::read(dir.path().join("bundle/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["pass"], true);
    assert!(dir.path().join("bundle/timings.json").exists());
}

#[test]
fn lps_spectral_bound_verifies() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("r.json"), r#"{"kind": "lps", "p": 5, "q": 13, "output": "lps.graph"}"#).unwrap();
    fs::write(dir.path().join("a.json"), r#"{"audits": [{"kind": "spectral", "max_lambda2": 4.47213595499958}]}"#).unwrap();
    assert_eq!(forge(dir.path(), &["construct", "r.json"]).status.code(), Some(0));
    let o = forge(dir.path(), &["verify", "lps.graph", "a.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}
