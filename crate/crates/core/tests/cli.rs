//! Exit codes, configuration precedence and output placement of the binary.

use std::path::Path;
use std::process::{Command, Output};

fn bclique(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bclique"))
        .current_dir(dir)
        .env_remove("BCLIQUE_OUT_DIR")
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn encode_block_small_instance() {
    let d = tempfile::tempdir().unwrap();
    let o = bclique(d.path(), &["encode", "block", "--n", "2", "--k", "2", "--p", "0", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("vars = 2") && out.contains("clauses = 4"), "{out}");
    let cnf = std::fs::read_to_string(d.path().join("block_n2_k2_seed1.cnf")).unwrap();
    assert!(cnf.lines().any(|l| l == "p cnf 2 4"), "{cnf}");
}

#[test]
fn complete_graph_has_every_cross_edge() {
    let d = tempfile::tempdir().unwrap();
    let o = bclique(d.path(), &["sample-graph", "--n", "4", "--k", "3", "--p", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("edges = 48"));
}

#[test]
fn usage_and_config_errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(bclique(d.path(), &["sample-graph", "--bogus"]).status.code(), Some(2));
    assert_eq!(bclique(d.path(), &["sample-graph", "--n", "12"]).status.code(), Some(2));
    assert_eq!(bclique(d.path(), &["--config", "missing.toml", "sample-graph"]).status.code(), Some(2));
    std::fs::write(d.path().join("bad.toml"), "n = \"sixteen\"\n").unwrap();
    assert_eq!(bclique(d.path(), &["--config", "bad.toml", "sample-graph"]).status.code(), Some(2));
}

#[test]
fn failed_assertion_exits_1() {
    let d = tempfile::tempdir().unwrap();
    let o = bclique(d.path(), &["check-density", "ac", "--p", "0.5", "--s", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(d.path().join("ac_n16_k3_seed0.json").exists());
}

#[test]
fn flags_override_section_overrides_top_level() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("c.toml"), "n = 4\nseed = 2\n\n[sample-graph]\nn = 64\n").unwrap();
    bclique(d.path(), &["--config", "c.toml", "sample-graph"]);
    assert!(d.path().join("graph_n64_k3_seed2.json").exists());
    bclique(d.path(), &["--config", "c.toml", "sample-graph", "--n", "16"]);
    assert!(d.path().join("graph_n16_k3_seed2.json").exists());
    bclique(d.path(), &["--config", "c.toml", "encode", "block"]);
    assert!(d.path().join("block_n4_k3_seed2.cnf").exists());
}

#[test]
fn output_locations() {
    let d = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_bclique"))
        .current_dir(d.path())
        .env("BCLIQUE_OUT_DIR", "from_env")
        .args(["sample-graph"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(d.path().join("from_env/graph_n16_k3_seed0.json").exists());

    bclique(d.path(), &["--out-dir", "flag", "sample-graph"]);
    assert!(d.path().join("flag/graph_n16_k3_seed0.json").exists());

    bclique(d.path(), &["--out", "exact.json", "sample-graph"]);
    assert!(d.path().join("exact.json").exists());
}

#[test]
fn timestamp_is_opt_in() {
    let d = tempfile::tempdir().unwrap();
    bclique(d.path(), &["--out", "plain.csv", "rank-prob", "--trials", "500"]);
    bclique(d.path(), &["--timestamp", "--out", "stamped.csv", "rank-prob", "--trials", "500"]);
    let plain = std::fs::read_to_string(d.path().join("plain.csv")).unwrap();
    let stamped = std::fs::read_to_string(d.path().join("stamped.csv")).unwrap();
    assert!(!plain.contains("generated"));
    assert!(stamped.lines().any(|l| l.contains("generated = ")));
}

#[test]
fn saved_artifacts_round_trip() {
    let d = tempfile::tempdir().unwrap();
    let o = bclique(d.path(), &["comm", "check", "--kind", "random", "--save-protocol", "p.json"]);
    assert_eq!(o.status.code(), Some(0));
    let o = bclique(d.path(), &["--out", "again.json", "comm", "check", "--protocol", "p.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let o = bclique(d.path(), &["verify", "rlin", "--edgeless", "--save-proof", "r.txt"]);
    assert_eq!(o.status.code(), Some(0));
    let o = bclique(d.path(), &["--out", "g.json", "sample-graph", "--n", "2", "--k", "2", "--p", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let o = bclique(d.path(), &["verify", "rlin", "--graph", "g.json", "--proof", "r.txt"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}
