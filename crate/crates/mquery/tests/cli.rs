//! End-to-end tests of the `mquery` binary: exit codes, output shape,
//! and byte-determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_mquery"));
    // Keep the environment from leaking a mode into the tests.
    c.env_remove("MQUERY_MODE");
    c
}

fn fixture_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mquery-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(name: &str, text: &str) -> PathBuf {
    let path = fixture_dir().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const DB: &str = r#"{"c": [{"_id": 1, "b": 2, "a": 1}, {"_id": 2, "a": [10, 20]}]}"#;

#[test]
fn eval_prints_the_answer_on_one_line() {
    let db = write("db.json", DB);
    let q = write(
        "q-match.json",
        r#"{"collection": "c", "pipeline": [{"$match": {"$eq": ["$a", 1]}}]}"#,
    );
    let out = bin().args(["eval", "--db"]).arg(&db).arg("--query").arg(&q).output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out), "[{\"_id\": 1, \"b\": 2, \"a\": 1}]\n");
}

#[test]
fn eval_mode_changes_printed_field_order() {
    let db = write("db.json", DB);
    let q = write("q-all.json", r#"{"collection": "c", "pipeline": []}"#);
    let ordered =
        bin().args(["eval", "--db"]).arg(&db).arg("--query").arg(&q).output().unwrap();
    assert!(stdout(&ordered).starts_with("[{\"_id\": 1, \"b\": 2, \"a\": 1}"));
    let unordered = bin()
        .args(["eval", "--mode", "unordered", "--db"])
        .arg(&db)
        .arg("--query")
        .arg(&q)
        .output()
        .unwrap();
    assert!(stdout(&unordered).starts_with("[{\"_id\": 1, \"a\": 1, \"b\": 2}"));
    // The flag and the environment variable agree.
    let via_env = bin()
        .env("MQUERY_MODE", "unordered")
        .args(["eval", "--db"])
        .arg(&db)
        .arg("--query")
        .arg(&q)
        .output()
        .unwrap();
    assert_eq!(stdout(&via_env), stdout(&unordered));
}

#[test]
fn eval_output_is_byte_deterministic() {
    let db = write("db.json", DB);
    let q = write("q-unwind.json", r#"{"collection": "c", "pipeline": [{"$unwind": "$a"}]}"#);
    let run = || {
        let out =
            bin().args(["eval", "--pretty", "--db"]).arg(&db).arg("--query").arg(&q).output();
        stdout(&out.unwrap())
    };
    let first = run();
    assert!(first.contains("\"a\": 10"));
    for _ in 0..3 {
        assert_eq!(run(), first);
    }
}

#[test]
fn invalid_query_exits_1_with_a_located_diagnostic() {
    let db = write("db.json", DB);
    let q = write(
        "q-bad.json",
        r#"{"collection": "c", "pipeline": [{"$project": {"a": 1, "a.b": 1}}]}"#,
    );
    let out = bin().args(["eval", "--db"]).arg(&db).arg("--query").arg(&q).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("/pipeline/0/$project/a.b"), "{}", stderr(&out));
    assert!(stdout(&out).is_empty());

    let json = bin()
        .args(["--json", "eval", "--db"])
        .arg(&db)
        .arg("--query")
        .arg(&q)
        .output()
        .unwrap();
    assert_eq!(json.status.code(), Some(1));
    assert!(stderr(&json).starts_with("{\"error\":"), "{}", stderr(&json));
}

#[test]
fn missing_file_exits_3() {
    let q = write("q-all.json", r#"{"collection": "c", "pipeline": []}"#);
    let out = bin()
        .args(["eval", "--db", "/nonexistent/db.json", "--query"])
        .arg(&q)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn optimize_normalizes_and_traces() {
    let q = write(
        "q-opt.json",
        r#"{"collection": "c", "pipeline": [
            {"$project": {"a": 1}},
            {"$match": {"$eq": ["$a", 1]}}]}"#,
    );
    let out = bin().args(["optimize", "--query"]).arg(&q).output().unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    // The filter moves ahead of the projection.
    assert!(
        text.find("$match").unwrap() < text.find("$project").unwrap(),
        "unexpected normal form:\n{text}"
    );
    let traced = bin().args(["optimize", "--trace", "--query"]).arg(&q).output().unwrap();
    assert!(traced.status.success());
    assert!(stdout(&traced).contains("\"rule\": \"project.past-match\""));
}

#[test]
fn equiv_accepts_equal_queries_and_reports_counterexamples() {
    let db = write("db.json", DB);
    let q1 = write("q-all.json", r#"{"collection": "c", "pipeline": []}"#);
    let q2 = write(
        "q-id.json",
        r#"{"collection": "c", "pipeline": [{"$match": {"$exists": "$_id"}}]}"#,
    );
    let q3 = write(
        "q-none.json",
        r#"{"collection": "c", "pipeline": [{"$match": {"$eq": ["$_id", null]}}]}"#,
    );
    let out = bin()
        .args(["equiv", "--q1"])
        .arg(&q1)
        .arg("--q2")
        .arg(&q2)
        .args(["--db"])
        .arg(&db)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("\"verdict\": \"equal\""));

    let out = bin()
        .args(["equiv", "--q1"])
        .arg(&q1)
        .arg("--q2")
        .arg(&q3)
        .args(["--db"])
        .arg(&db)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("\"verdict\": \"counterexample\""));

    let seeded = bin()
        .args(["equiv", "--q1"])
        .arg(&q1)
        .arg("--q2")
        .arg(&q2)
        .args(["--seeds", "10"])
        .output()
        .unwrap();
    assert!(seeded.status.success(), "{}", stderr(&seeded));
    assert!(stdout(&seeded).contains("\"instancesChecked\": 10"));
}

#[test]
fn equiv_rejects_non_core_stages_under_seeds() {
    let q1 = write("q-all.json", r#"{"collection": "c", "pipeline": []}"#);
    let q2 = write(
        "q-sort.json",
        r#"{"collection": "c", "pipeline": [{"$sort": {"a": 1}}]}"#,
    );
    let out = bin()
        .args(["equiv", "--q1"])
        .arg(&q1)
        .arg("--q2")
        .arg(&q2)
        .args(["--seeds", "5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("seed-based equivalence"), "{}", stderr(&out));
}

#[test]
fn fuzz_reports_per_rule_statistics() {
    let out = bin().args(["fuzz", "--seeds", "5", "--rules", "match"]).output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("\"rule\": \"match.merge\""));
    assert!(text.contains("\"applications\": 5"));
    assert!(!text.contains("unwind.swap"));
}

#[test]
fn golden_lists_every_case_as_passing() {
    let out = bin().arg("golden").output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.lines().count() >= 20);
    assert!(text.lines().all(|l| l.starts_with("pass  ")), "{text}");
}
