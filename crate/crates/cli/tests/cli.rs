//! End-to-end checks of the `hcf` binary: exit codes, output contracts,
//! and determinism of seeded runs.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn hcf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hcf"))
        .args(args)
        .env_remove("HCF_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf8 stderr")
}

fn temp_path(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("hcf-cli-test-{}-{name}", std::process::id()));
    p
}

const SINGLETON_PAIR: &str = r#"{"d":2,"S":["00"],"T":["11"],"phi":[["00","11"]]}"#;

#[test]
fn lr_route_prints_solution_and_self_check() {
    let out = hcf(&["lr-route", SINGLETON_PAIR]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "00 -> 10 -> 11\nvertex-disjoint: OK\n");
}

#[test]
fn lr_route_json_stdout_is_a_single_document() {
    let out = hcf(&["lr-route", SINGLETON_PAIR, "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "{\"paths\":[[\"00\",\"10\",\"11\"]]}\n");
    assert_eq!(stderr(&out), "vertex-disjoint: OK\n");
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(parsed.get("paths").is_some());
}

#[test]
fn lr_route_reads_pair_from_file() {
    let path = temp_path("pair.json");
    fs::write(&path, SINGLETON_PAIR).unwrap();
    let out = hcf(&["lr-route", path.to_str().unwrap()]);
    fs::remove_file(&path).ok();
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("vertex-disjoint: OK"));
}

#[test]
fn invalid_pair_exits_two_with_message() {
    let out = hcf(&["lr-route", r#"{"d":2,"S":["01"],"T":["10"],"phi":[["01","10"]]}"#]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("not a matched pair"));
}

#[test]
fn route2_emits_both_collections() {
    let out = hcf(&["lr-route2", SINGLETON_PAIR]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("collection 1:\n"));
    assert!(text.contains("collection 2:\n"));
    assert!(text.contains("vertex-disjoint: OK\n"));
    assert!(text.contains("edge-disjoint: OK\n"));
}

#[test]
fn route2_rejects_adjacent_levels() {
    let out = hcf(&["lr-route2", r#"{"d":2,"S":["00"],"T":["01"],"phi":[["00","01"]]}"#]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("distance \u{2265} 2 required"));
}

#[test]
fn analyze_fn_reports_the_anti_dictator_gap() {
    let out = hcf(&["analyze-fn", "1010"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("eps: 1/2\n"));
    assert!(text.contains("influence: 1\n"));
    assert!(text.contains("gamma_plus: 1/2\n"));
    assert!(text.contains("min_talagrand: 0.5\n"));
}

#[test]
fn analyze_fn_monotone_is_all_zeros() {
    let out = hcf(&["analyze-fn", "0011"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("monotone: yes\n"));
    assert!(text.contains("eps: 0\n"));
    assert!(text.contains("influence: 0\n"));
    assert!(text.contains("gamma_plus: 0\n"));
    assert!(text.contains("min_talagrand: 0\n"));
    assert!(text.contains("margulis_ratio: 0\n"));
    assert!(text.contains("talagrand_ratio: 0\n"));
}

#[test]
fn analyze_fn_rejects_bad_table_lengths() {
    let out = hcf(&["analyze-fn", "101"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("expected 2^d"));
}

#[test]
fn analyze_fn_accepts_hex_tables() {
    let direct = hcf(&["analyze-fn", "1010", "--format", "json"]);
    let hex = hcf(&["analyze-fn", "0xa", "--format", "json"]);
    assert_eq!(stdout(&direct), stdout(&hex));
}

#[test]
fn search_rejects_oversized_dimensions() {
    let out = hcf(&["search", "rout", "--d", "30"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("out of range"));
}

#[test]
fn search_rejects_exhaustive_with_budget() {
    let out = hcf(&["search", "rout", "--d", "3", "--exhaustive", "--budget", "5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn search_rout_exhaustive_reports_all_subsets() {
    let out = hcf(&["search", "rout", "--d", "3", "--exhaustive", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["conjecture"], "rout");
    assert_eq!(report["instances"], 254);
    assert_eq!(report["failures"].as_array().unwrap().len(), 0);
}

#[test]
fn emit_report_round_trips_and_replays() {
    let path = temp_path("report.json");
    let search = hcf(&[
        "search", "glr", "--d", "3", "--exhaustive", "--format", "json", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(search.status.code(), Some(0));
    let document = fs::read_to_string(&path).unwrap();

    let json = hcf(&["emit-report", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(json.status.code(), Some(0));
    assert_eq!(stdout(&json), document);

    let csv = hcf(&["emit-report", path.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(csv.status.code(), Some(0));
    assert!(stdout(&csv).starts_with("conjecture,seed,instances,"));
    fs::remove_file(&path).ok();
}

#[test]
fn emit_report_rejects_tampered_ratios() {
    let out = hcf(&["search", "glr", "--d", "2", "--exhaustive", "--format", "json"]);
    let tampered = stdout(&out).replace("\"min_ratio\":{\"num\":1,\"den\":1}", "\"min_ratio\":{\"num\":7,\"den\":3}");
    assert_ne!(stdout(&out), tampered);
    let emit = hcf(&["emit-report", &tampered]);
    assert_eq!(emit.status.code(), Some(2));
    assert!(stderr(&emit).contains("does not replay"));
}

#[test]
fn check_theorems_exhaustive_passes() {
    let out = hcf(&["check-theorems", "--d", "2", "--exhaustive"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("instances: 14\n"));
    assert!(text.contains("all pass: yes\n"));
}

#[test]
fn seeded_runs_are_byte_identical() {
    for args in [
        &["search", "rout", "--d", "5", "--budget", "300", "--seed", "11", "--format", "json"][..],
        &["search", "glr", "--d", "4", "--budget", "200", "--seed", "7", "--format", "csv"][..],
        &["check-theorems", "--d", "5", "--budget", "150", "--seed", "2", "--format", "json"][..],
    ] {
        let first = hcf(args);
        let second = hcf(args);
        assert_eq!(first.status.code(), Some(0));
        assert_eq!(second.status.code(), Some(0));
        assert_eq!(first.stdout, second.stdout, "drift under {args:?}");
    }
}

#[test]
fn invalid_thread_cap_exits_two() {
    let out = Command::new(env!("CARGO_BIN_EXE_hcf"))
        .args(["analyze-fn", "1010"])
        .env("HCF_THREADS", "zero")
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("HCF_THREADS"));
}

#[test]
fn thread_cap_applies_cleanly() {
    let out = Command::new(env!("CARGO_BIN_EXE_hcf"))
        .args(["check-theorems", "--d", "3", "--exhaustive", "--format", "csv"])
        .env("HCF_THREADS", "2")
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("3,exhaustive,0,254,0,0,0,0,"));
}
