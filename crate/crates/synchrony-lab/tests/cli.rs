//! End-to-end tests of the installed binary: exit-code contract, fixture
//! URIs, output shapes, and byte-determinism of structured output under a
//! fixed seed regardless of thread count.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_synchrony-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let path =
        std::env::temp_dir().join(format!("synchrony-lab-test-{}-{name}", std::process::id()));
    std::fs::write(&path, contents).expect("write temp file");
    path
}

#[test]
fn help_lists_every_subcommand() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for sub in [
        "synchrony",
        "automorphisms",
        "exotic",
        "bounds",
        "equilibria",
        "simulate",
        "table1",
        "verify",
    ] {
        assert!(text.contains(sub), "--help missing subcommand {sub}");
    }
}

#[test]
fn bad_invocations_exit_two() {
    assert_eq!(run(&["--definitely-not-a-flag"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["exotic", "--graph", "fixture:nope"]).status.code(), Some(2));
    assert_eq!(run(&["exotic", "--graph", "/no/such/file.json"]).status.code(), Some(2));
}

#[test]
fn fixtures_flag_lists_graphs_and_systems() {
    let out = run(&["--fixtures"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("graphs:"));
    assert!(text.contains("systems:"));
    assert!(text.contains("kuramoto-g6"));
    assert!(text.contains("fig1"));
}

#[test]
fn exotic_matches_embedded_expectations() {
    let out = run(&["exotic", "--graph", "fixture:g6"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("0 exotic patterns"));

    let out = run(&["exotic", "--graph", "fixture:fig1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("53 exotic patterns"));
}

#[test]
fn bounds_accepts_signed_laplacian_and_rejects_other_matrices() {
    let good = temp_file("good.json", r#"{"n":2,"rows":[[-1.0,1.0],[1.0,-1.0]]}"#);
    let out = run(&["bounds", "--matrix", good.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("within bounds: true"));

    let bad = temp_file("bad.json", r#"{"n":2,"rows":[[1.0,0.0],[0.0,1.0]]}"#);
    let out = run(&["bounds", "--matrix", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let garbled = temp_file("garbled.json", "not json");
    let out = run(&["bounds", "--matrix", garbled.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn table1_text_matches_and_exits_zero() {
    let out = run(&["table1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("table matches"));
    assert!(text.contains("row 8"));
    assert!(!text.contains("MISMATCH"));
}

#[test]
fn synchrony_json_has_schema_version_and_balanced_patterns() {
    let out = run(&["synchrony", "--graph", "fixture:ring3", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(doc["schema_version"], 1);
    let patterns = doc["patterns"].as_array().expect("patterns array");
    // ring 3 nontrivial balanced patterns: the three {i},{j,k} splits.
    assert_eq!(patterns.len(), 3);
    for p in patterns {
        assert_eq!(p["balanced"], true);
    }
}

#[test]
fn structured_output_is_byte_identical_across_thread_counts() {
    let args = |threads: &str| {
        vec![
            "equilibria".to_string(),
            "--system".to_string(),
            "fixture:g6-tilde".to_string(),
            "--pattern".to_string(),
            "1,5|2,4|3|6".to_string(),
            "--format".to_string(),
            "json".to_string(),
            "--seed".to_string(),
            "7".to_string(),
            "--threads".to_string(),
            threads.to_string(),
        ]
    };
    let one = bin().args(args("1")).output().expect("binary runs");
    let four = bin().args(args("4")).output().expect("binary runs");
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(four.status.code(), Some(0));
    assert!(!one.stdout.is_empty());
    assert_eq!(one.stdout, four.stdout, "output differs across --threads");
}

#[test]
fn seed_environment_variable_sets_default() {
    let out = bin()
        .args(["synchrony", "--graph", "fixture:ring3", "--format", "json"])
        .env("SYNCHRONY_LAB_SEED", "12345")
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(0));
    // The lattice itself is deterministic; this checks the env var parses
    // and the run still succeeds (a bad value must not crash startup).
    let out = bin()
        .args(["synchrony", "--graph", "fixture:ring3"])
        .env("SYNCHRONY_LAB_SEED", "not-a-number")
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn simulate_emits_csv_trajectory_with_potential() {
    let out = run(&[
        "simulate",
        "--system",
        "fixture:kuramoto-g6",
        "--x0",
        "0.3,0.1,-0.2,0.05,0.0,-0.1",
        "--t-end",
        "1.0",
        "--dt",
        "0.1",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x1,x2,x3,x4,x5,x6,potential"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 11); // t = 0.0, 0.1, ..., 1.0
    let potentials: Vec<f64> = rows
        .iter()
        .map(|r| r.rsplit(',').next().unwrap().parse().expect("potential column"))
        .collect();
    for w in potentials.windows(2) {
        assert!(w[1] <= w[0] + 1e-9, "potential increased: {} -> {}", w[0], w[1]);
    }
}

#[test]
fn equilibria_warns_on_imbalanced_constants() {
    // Constants that differ across cells shift the flow off the torus
    // gradient structure; the command still runs but warns on stderr.
    let system = r#"{
        "graph": {"cells": 3, "cell_classes": ["p", "p", "p"], "edges": [
            {"u": 1, "v": 2, "class": "a"},
            {"u": 2, "v": 3, "class": "a"},
            {"u": 1, "v": 3, "class": "a"}
        ]},
        "couplings": {"a": {"kind": "sine", "amplitude": 1.0}},
        "constants": {"p": 0.5}
    }"#;
    let path = temp_file("imbalanced.json", system);
    let out = run(&["equilibria", "--system", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(
        stderr(&out).contains("constant"),
        "expected a constant-sum warning, stderr: {}",
        stderr(&out)
    );
}
