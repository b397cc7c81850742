use std::fs;
use std::io::Write;

use serde_json::Value;

fn run(args: &[&str]) -> (u8, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("kloosterman").chain(args.iter().copied());
    let code = kloosterman_cli::run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn run_json(args: &[&str]) -> (u8, Value) {
    let (code, out, _) = run(args);
    (code, serde_json::from_str(&out).expect("json document"))
}

#[test]
fn classical_minus_one() {
    let (code, doc) = run_json(&[
        "classical",
        "-m",
        "1",
        "-n",
        "1",
        "-c",
        "3",
        "--format",
        "json",
    ]);
    assert_eq!(code, 0);
    assert_eq!(doc["value_re"], -1.0);
    assert_eq!(doc["value_im"], 0.0);
    assert_eq!(doc["query"]["kind"], "classical");
    assert!(doc["elapsed_ms"].is_number());
}

#[test]
fn negative_character_arguments_parse() {
    let (code, doc) = run_json(&["classical", "-m", "-2", "-n", "5", "-c", "7"]);
    assert_eq!(code, 0);
    assert_eq!(doc["query"]["m"], -2);
}

#[test]
fn trivial_fine_cell_both_methods() {
    let (code, doc) = run_json(&[
        "sl4",
        "fine",
        "--cell",
        "1,1,1,1,1,1",
        "-m",
        "0,0,0",
        "-n",
        "0,0,0",
        "--method",
        "both",
    ]);
    assert_eq!(code, 0);
    assert_eq!(doc["results"]["oracle"]["value_re"], 1.0);
    assert_eq!(doc["results"]["closed_form"]["value_re"], 1.0);
    assert_eq!(doc["agree"], true);
    assert!(doc["discrepancy"].is_null());
}

#[test]
fn disagreement_carries_a_record() {
    let (code, doc) = run_json(&[
        "sl4",
        "fine",
        "--cell",
        "1,1,1,1,1,2",
        "-m",
        "0,0,0",
        "-n",
        "0,0,0",
        "--method",
        "both",
    ]);
    assert_eq!(code, 0);
    assert_eq!(doc["results"]["closed_form"]["value_re"], 16.0);
    assert_eq!(doc["agree"], false);
    assert_eq!(
        doc["discrepancy"]["cell"],
        serde_json::json!([1, 1, 1, 1, 1, 2])
    );
}

#[test]
fn coarse_oracle_matches_trivial_modulus() {
    let (code, doc) = run_json(&[
        "sl4", "coarse", "--c", "1,1,1", "-m", "1,2,3", "-n", "0,0,0",
    ]);
    assert_eq!(code, 0);
    assert_eq!(doc["value_re"], 1.0);
}

#[test]
fn sl5_trivial_cell() {
    let (code, doc) = run_json(&[
        "sl5",
        "fine",
        "--cell",
        "1,1,1,1,1,1,1,1,1,1",
        "-m",
        "1,0,0,1",
        "-n",
        "0,1,0,0",
    ]);
    assert_eq!(code, 0);
    assert_eq!(doc["value_re"], 1.0);
    assert_eq!(doc["query"]["psi"], "corrected");
    let (_, strict) = run_json(&[
        "--strict-paper-psi",
        "sl5",
        "fine",
        "--cell",
        "1,1,1,1,1,1,1,1,1,1",
        "-m",
        "1,0,0,1",
        "-n",
        "0,1,0,0",
    ]);
    assert_eq!(strict["query"]["psi"], "strict_paper");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["classical", "-m", "1", "-n", "1", "-c", "0"]).0, 1);
    assert_eq!(run(&["classical", "-m", "1"]).0, 2);
    assert_eq!(
        run(&["sl4", "fine", "--cell", "1,1", "-m", "0,0,0", "-n", "0,0,0"]).0,
        2
    );
    assert_eq!(run(&["verify", "--suite", "bruhat"]).0, 2);
    assert_eq!(run(&["--help"]).0, 0);
    let (code, doc) = run_json(&[
        "--budget", "3", "sl4", "coarse", "--c", "4,4,4", "-m", "0,0,0", "-n", "0,0,0",
    ]);
    assert_eq!(code, 1);
    assert_eq!(doc["error"]["code"], "BudgetExceeded");
}

#[test]
fn csv_and_text_formats() {
    let (code, out, _) = run(&[
        "classical",
        "-m",
        "1",
        "-n",
        "1",
        "-c",
        "3",
        "--format",
        "csv",
    ]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("key,value"));
    assert!(out.lines().any(|l| l == "value_re,-1.0"));
    let (_, text, _) = run(&[
        "classical",
        "-m",
        "1",
        "-n",
        "1",
        "-c",
        "3",
        "--format",
        "text",
    ]);
    assert!(text
        .lines()
        .any(|l| l.starts_with("value_re") && l.ends_with("-1.0")));
}

#[test]
fn decompose_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.json");
    fs::write(
        &path,
        r#"{"n":4,"entries":[[-2,-34,10,9],[0,11,-2,-2],[0,-5,1,1],[-1,-1,2,1]]}"#,
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let (code, doc) = run_json(&["decompose", "--matrix", p, "--rank", "4", "--canonical"]);
    assert_eq!(code, 0);
    assert_eq!(doc["reconstructed"], true);
    assert_eq!(doc["t"], serde_json::json!(["-1", "5", "1/5", "-1"]));
    assert_eq!(doc["u_L"][1][2], "-11/5");
    assert_eq!(run(&["decompose", "--matrix", p, "--rank", "5"]).0, 2);

    fs::write(
        &path,
        r#"{"n":4,"entries":[[1,2,0,1],[0,1,3,0],[2,0,1,1],[1,1,1,2]]}"#,
    )
    .unwrap();
    let (code, doc) = run_json(&["decompose", "--matrix", p]);
    assert_eq!(code, 1);
    assert_eq!(doc["error"]["code"], "NotSpecialLinear");

    fs::write(&path, "{\"n\": 4}").unwrap();
    assert_eq!(
        run_json(&["decompose", "--matrix", p]).1["error"]["code"],
        "BadInput"
    );
}

#[test]
fn groups_check_documents() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("j.json");
    fs::write(
        &path,
        r#"{"n":4,"entries":[[0,0,1,0],[0,0,0,1],[-1,0,0,0],[0,-1,0,0]]}"#,
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let (code, doc) = run_json(&["groups", "check", "--kind", "sp4", "--matrix", p]);
    assert_eq!(code, 0);
    assert_eq!(doc["symplectic"], true);
    assert_eq!(doc["relations_vanish"], true);
    let (_, doc) = run_json(&["groups", "check", "--kind", "so4", "--matrix", p]);
    assert_eq!(doc["member"], true);
}

#[test]
fn corrupt_cache_is_tolerated() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache.jsonl");
    let c = cache.to_str().unwrap();
    let q = ["--cache", c, "classical", "-m", "2", "-n", "3", "-c", "11"];
    let (_, first) = run_json(&q);
    assert_eq!(first["cache"], "miss");
    fs::OpenOptions::new()
        .append(true)
        .open(&cache)
        .unwrap()
        .write_all(b"{garbage\n")
        .unwrap();
    let (code, out, err) = run(&q);
    assert_eq!(code, 0);
    assert!(err.contains("corrupt cache line"));
    let second: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(second["cache"], "hit");
    assert_eq!(second["exact_phases"], first["exact_phases"]);

    let (_, off) = run_json(&[
        "--no-cache",
        "--cache",
        c,
        "classical",
        "-m",
        "2",
        "-n",
        "3",
        "-c",
        "11",
    ]);
    assert!(off.get("cache").is_none());
}

#[test]
fn verify_writes_discrepancy_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.jsonl");
    let (code, doc) = run_json(&[
        "verify",
        "--suite",
        "closed-form",
        "--discrepancies",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let n = fs::read_to_string(&path).unwrap().lines().count();
    assert_eq!(doc["discrepancy_count"], n);
    assert!(doc.get("discrepancies").is_none());
}

#[test]
fn weil_example_passes() {
    let (code, doc) = run_json(&["verify", "--suite", "weil", "--max-c", "100", "--seed", "7"]);
    assert_eq!(code, 0);
    assert_eq!(doc["passed"], true);
}
