//! End-to-end smoke tests for the `exsearch` binary: every subcommand, both
//! output modes, file emission, and exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exsearch"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn tmp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("exsearch-cli-{}-{name}", std::process::id()))
}

#[test]
fn bounds_text_shows_two_round_window() {
    let out = run(&["bounds", "--n", "100", "--d", "2", "--r", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("upper_algorithmic=30"), "{text}");
    assert!(text.contains("two-round window: [20, 30]"), "{text}");
}

#[test]
fn bounds_json_round_trips() {
    let out = run(&["bounds", "--n", "1000", "--r", "3", "--json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["upper_algorithmic"], 30);
    assert_eq!(doc["d"], 1);
}

#[test]
fn play_json_has_result_shape() {
    let out = run(&[
        "play",
        "--n",
        "9",
        "--r",
        "2",
        "--questioner",
        "katona",
        "--adversary",
        "endgame-auto",
        "--json",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["verdict_valid"], true);
    let total = doc["total_queries"].as_u64().unwrap();
    assert!((5..=6).contains(&total), "total {total}");
    assert!(doc["transcript"].is_null());
}

#[test]
fn play_text_summary_reports_verdict_and_ledger() {
    let out = run(&[
        "play",
        "--n",
        "30",
        "--d",
        "2",
        "--r",
        "3",
        "--questioner",
        "katona-parallel",
        "--adversary",
        "good-family",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("verdict:"), "{text}");
    assert!(text.contains("(valid)"), "{text}");
    assert!(text.contains("0 failed"), "{text}");
}

#[test]
fn play_emits_transcript_file() {
    let path = tmp("transcript.json");
    let out = run(&[
        "play",
        "--n",
        "9",
        "--r",
        "2",
        "--questioner",
        "katona",
        "--adversary",
        "lemma",
        "--emit-transcript",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["rounds"].as_array().unwrap().len(), 2);
    assert_eq!(doc["config"]["n"], 9);
    std::fs::remove_file(&path).ok();
}

#[test]
fn solve_prints_value() {
    let out = run(&["solve", "--n", "2", "--r", "1", "--json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["value"], 2);
}

#[test]
fn solve_emits_strategy_file() {
    let path = tmp("strategy.json");
    let out = run(&[
        "solve",
        "--n",
        "2",
        "--r",
        "1",
        "--emit-strategy",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["value"], 2);
    assert_eq!(doc["root"]["queries"], serde_json::json!([[1], [2]]));
    std::fs::remove_file(&path).ok();
}

#[test]
fn sweep_csv_has_header_rows_and_trailer() {
    let out = run(&[
        "sweep",
        "--ns",
        "8,9",
        "--rs",
        "2",
        "--questioner",
        "katona",
        "--adversary",
        "endgame-auto",
        "--adversary",
        "fixed:1",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6, "{text}");
    assert_eq!(
        lines[0],
        "n,d,r,questioner,adversary,total_queries,lower,upper_alg,verdict,valid"
    );
    assert_eq!(lines[5], "# summary: rows=4 bound_violations=0");
}

#[test]
fn sweep_json_format_carries_summary() {
    let out = run(&[
        "sweep",
        "--ns",
        "10..12",
        "--rs",
        "2",
        "--questioner",
        "singletons",
        "--adversary",
        "lemma",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["rows"].as_array().unwrap().len(), 3);
    assert_eq!(doc["summary"]["rows"], 3);
    assert_eq!(doc["summary"]["bound_violations"], 0);
}

#[test]
fn sweep_writes_file_when_asked() {
    let path = tmp("sweep.csv");
    let out = run(&[
        "sweep",
        "--ns",
        "9",
        "--rs",
        "2",
        "--questioner",
        "katona",
        "--adversary",
        "lemma",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.ends_with("# summary: rows=1 bound_violations=0\n"), "{text}");
    std::fs::remove_file(&path).ok();
}

#[test]
fn verify_quick_passes() {
    let out = run(&["verify"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("all invariants hold"), "{text}");
    assert!(!text.contains("FAIL "), "{text}");
}

#[test]
fn bad_strategy_name_exits_two() {
    let out = run(&[
        "play",
        "--n",
        "9",
        "--r",
        "2",
        "--questioner",
        "nope",
        "--adversary",
        "lemma",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr.clone()).unwrap();
    assert!(err.contains("error:"), "{err}");
}
