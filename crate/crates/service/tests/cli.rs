mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

struct Fixture {
    _dir: tempfile::TempDir,
    corpus: PathBuf,
    thesaurus: PathBuf,
}

fn fixture(corpus: &str) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("corpus.jsonl");
    let t = dir.path().join("thesaurus.json");
    std::fs::write(&c, corpus).unwrap();
    std::fs::write(&t, common::thesaurus_json()).unwrap();
    Fixture {
        _dir: dir,
        corpus: c,
        thesaurus: t,
    }
}

fn lumiref(fx: &Fixture, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lumiref"))
        .arg("--corpus")
        .arg(&fx.corpus)
        .arg("--thesaurus")
        .arg(&fx.thesaurus)
        .args(args)
        .env("RUST_LOG", "off")
        .output()
        .unwrap()
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn index_summarizes_and_canonicalizes() {
    let fx = fixture(&common::corpus_jsonl());
    let v = stdout_json(&lumiref(&fx, &["index"]));
    assert_eq!(v["images"], 42);
    assert_eq!(v["terms"], 42);
    assert_eq!(v["thesaurus_version"], "test-1");

    // same inputs, same checksum
    let again = stdout_json(&lumiref(&fx, &["index"]));
    assert_eq!(again["checksum"], v["checksum"]);

    let canon = fx.corpus.with_file_name("canon.jsonl");
    let out = lumiref(&fx, &["index", "--canonical", canon.to_str().unwrap()]);
    assert!(out.status.success());
    let first = std::fs::read_to_string(&canon).unwrap();
    assert_eq!(first.lines().count(), 42);

    // the canonical form is a fixed point
    let fx2 = Fixture {
        _dir: tempfile::tempdir().unwrap(),
        corpus: canon.clone(),
        thesaurus: fx.thesaurus.clone(),
    };
    let canon2 = fx.corpus.with_file_name("canon2.jsonl");
    let out = lumiref(&fx2, &["index", "--canonical", canon2.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(std::fs::read_to_string(&canon2).unwrap(), first);
    assert_eq!(stdout_json(&out)["checksum"], v["checksum"]);
}

#[test]
fn search_by_image_puts_the_duplicate_first() {
    let fx = fixture(&common::corpus_jsonl());
    let v = stdout_json(&lumiref(&fx, &["search", "--query-image", "img00", "--limit", "5"]));
    let entries = v["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 5);
    assert_eq!(entries[0]["image"], "dup00");
    assert_eq!(entries[0]["score"], 1.0);
    assert!(entries.iter().all(|e| e["image"] != "img00"));
}

#[test]
fn search_by_terms_and_category() {
    let fx = fixture(&common::corpus_jsonl());
    let v = stdout_json(&lumiref(&fx, &["search", "--term", "t6.5:3"]));
    assert_eq!(v["entries"][0]["image"], "iso");
    assert_eq!(v["entries"][0]["score"], 1.0);

    let v = stdout_json(&lumiref(
        &fx,
        &["search", "--query-image", "iso", "--category", "c6"],
    ));
    assert_eq!(v["entries"].as_array().unwrap().len(), 0);
}

#[test]
fn bad_term_weight_exits_nonzero() {
    let fx = fixture(&common::corpus_jsonl());
    let out = lumiref(&fx, &["search", "--term", "t0.0:7"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("WeightOutOfRange"), "{}", stderr(&out));

    let out = lumiref(&fx, &["search", "--term", "t0.0"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("MalformedRequest"));

    let out = lumiref(&fx, &["search", "--query-image", "ghost"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("UnknownImage"));
}

#[test]
fn graph_at_full_threshold() {
    // without the duplicate nothing is identical
    let text: String = common::corpus_jsonl()
        .lines()
        .filter(|l| !l.contains("\"dup00\""))
        .map(|l| format!("{l}\n"))
        .collect();
    let fx = fixture(&text);
    let v = stdout_json(&lumiref(&fx, &["graph", "--threshold", "1.0"]));
    assert_eq!(v["nodes"].as_array().unwrap().len(), 41);
    assert_eq!(v["edges"].as_array().unwrap().len(), 0);

    let fx = fixture(&common::corpus_jsonl());
    let out_file = fx.corpus.with_file_name("graph.json");
    let out = lumiref(
        &fx,
        &["graph", "--threshold", "1.0", "--out", out_file.to_str().unwrap()],
    );
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out_file).unwrap()).unwrap();
    assert_eq!(v["edges"].as_array().unwrap().len(), 1);

    let out = lumiref(&fx, &["graph", "--threshold", "1.5"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("InvalidConfig"));
}

#[test]
fn invalid_corpus_is_rejected_by_index_and_serve() {
    let bad = format!(
        "{}\n{}\n",
        common::line("ok", &[("t0.0", 2)]),
        common::line("loud", &[("t0.1", 5)])
    );
    let fx = fixture(&bad);
    let out = lumiref(&fx, &["index"]);
    assert!(!out.status.success());
    let err = stderr(&out);
    assert!(err.contains("WeightOutOfRange"), "{err}");
    assert!(err.contains("loud"), "{err}");

    let data = fx.corpus.with_file_name("data");
    let out = lumiref(
        &fx,
        &["serve", "--port", "0", "--data-dir", data.to_str().unwrap()],
    );
    assert!(!out.status.success());
    assert!(stderr(&out).contains("WeightOutOfRange"));
}

#[test]
fn every_violation_is_listed() {
    let bad = format!(
        "{}\n{}\n",
        common::line("a", &[("t0.0", 9)]),
        common::line("b", &[("zz", 1)])
    );
    let fx = fixture(&bad);
    let err = stderr(&lumiref(&fx, &["index"]));
    assert!(err.contains("WeightOutOfRange"), "{err}");
    assert!(err.contains("UnknownTerm") || err.contains("'zz'"), "{err}");
    assert!(err.lines().filter(|l| l.starts_with("  - ")).count() >= 2, "{err}");
}

#[test]
fn inputs_come_from_the_environment_too() {
    let fx = fixture(&common::corpus_jsonl());
    let out = Command::new(env!("CARGO_BIN_EXE_lumiref"))
        .arg("index")
        .env("LUMIREF_CORPUS", &fx.corpus)
        .env("LUMIREF_THESAURUS", &fx.thesaurus)
        .env("RUST_LOG", "off")
        .output()
        .unwrap();
    assert_eq!(stdout_json(&out)["images"], 42);

    let out = Command::new(env!("CARGO_BIN_EXE_lumiref"))
        .args(["graph", "--threshold", "0.0"])
        .env("LUMIREF_CORPUS", &fx.corpus)
        .env("LUMIREF_THESAURUS", &fx.thesaurus)
        .env("LUMIREF_GRAPH_K", "1")
        .env("RUST_LOG", "off")
        .output()
        .unwrap();
    let v = stdout_json(&out);
    // top-1 per node, union of both directions: at most one edge per node
    let edges = v["edges"].as_array().unwrap().len();
    assert!(edges <= 42 && edges > 0, "{edges}");

    let out = Command::new(env!("CARGO_BIN_EXE_lumiref"))
        .arg("index")
        .env_remove("LUMIREF_CORPUS")
        .env("LUMIREF_THESAURUS", &fx.thesaurus)
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(stderr(&out).contains("MissingArgument"));
}

#[test]
fn unreadable_inputs_are_reported() {
    let fx = Fixture {
        _dir: tempfile::tempdir().unwrap(),
        corpus: Path::new("/nonexistent/corpus.jsonl").into(),
        thesaurus: Path::new("/nonexistent/thesaurus.json").into(),
    };
    let out = lumiref(&fx, &["index"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("UnreadableFile"));
}

#[test]
fn repeated_search_term_is_a_duplicate() {
    let fx = fixture(&common::corpus_jsonl());
    let out = lumiref(&fx, &["search", "--term", "t0.0:1", "--term", "t0.0:2"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("DuplicateTermInIndex"));
}
