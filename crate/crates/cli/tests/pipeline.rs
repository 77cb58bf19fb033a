use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const DATASET: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/mini_dataset.json");

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plainlang")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

struct Work {
    dir: tempfile::TempDir,
}

impl Work {
    fn new() -> Self {
        let w = Self { dir: tempfile::tempdir().unwrap() };
        ok(&["ingest", "--input", DATASET, "--out", &w.s("corpus.jsonl")]);
        ok(&["split", "--corpus", &w.s("corpus.jsonl"), "--seed", "7", "--out", &w.s("split.json")]);
        w
    }

    fn p(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn s(&self, name: &str) -> String {
        self.p(name).display().to_string()
    }
}

#[test]
fn ingest_and_split_write_manifests() {
    let w = Work::new();
    let corpus = std::fs::read_to_string(w.p("corpus.jsonl")).unwrap();
    assert_eq!(corpus.lines().count(), 6);
    let m = json(&w.p("corpus.jsonl.manifest.json"));
    assert_eq!(m["command"], "ingest");
    assert_eq!(m["summary"]["adaptations"], 8);
    assert_eq!(m["summary"]["violations"].as_array().unwrap().len(), 1);
    assert!(m["input_hashes"].as_object().unwrap().len() == 1);

    let split = json(&w.p("split.json"));
    assert_eq!(split["seed"], 7);
    assert_eq!(split["sample_counts"]["total"], 8);
    assert!(w.p("split.json.manifest.json").exists());
}

#[test]
fn adapt_all_strategies_with_mock() {
    let w = Work::new();
    for strategy in ["baseline", "two-agents", "finetuned"] {
        let out = w.s(&format!("{strategy}.jsonl"));
        ok(&["adapt", "--corpus", &w.s("corpus.jsonl"), "--split", &w.s("split.json"), "--strategy", strategy, "--backend", "echo", "--out", &out]);
        let lines: Vec<Value> = std::fs::read_to_string(&out).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert!(!lines.is_empty());
        for l in &lines {
            assert_eq!(l["adapted_sentences"].as_array().unwrap().len(), 3);
        }
        let m = json(Path::new(&format!("{out}.manifest.json")));
        assert_eq!(m["prompt_asset_hashes"]["system"].as_str().unwrap().len(), 64);
        assert!(Path::new(&format!("{out}.transcript.jsonl")).exists());
    }
}

#[test]
fn rerun_is_byte_identical() {
    let w = Work::new();
    let args = |out: &str| {
        vec![
            "adapt".to_string(), "--corpus".into(), w.s("corpus.jsonl"), "--split".into(), w.s("split.json"), "--side".into(), "train".into(),
            "--strategy".into(), "two-agents".into(), "--backend".into(), "randomized".into(), "--mock-seed".into(), "3".into(),
            "--repair-attempts".into(), "6".into(), "--out".into(), w.s(out),
        ]
    };
    for out in ["a.jsonl", "b.jsonl"] {
        let a = args(out);
        let out = run(&a.iter().map(String::as_str).collect::<Vec<_>>());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(std::fs::read(w.p("a.jsonl")).unwrap(), std::fs::read(w.p("b.jsonl")).unwrap());
    ok(&["split", "--corpus", &w.s("corpus.jsonl"), "--seed", "7", "--out", &w.s("split2.json")]);
    assert_eq!(std::fs::read(w.p("split.json")).unwrap(), std::fs::read(w.p("split2.json")).unwrap());
}

#[test]
fn score_evaluate_report() {
    let w = Work::new();
    let (corpus, split) = (w.s("corpus.jsonl"), w.s("split.json"));
    let base = ["--corpus", &corpus, "--split", &split, "--side", "train"];
    ok(&[&["score", "--source", "ground-truth", "--out", &w.s("gt.json")][..], &base].concat());
    ok(&[&["score", "--source", "abstract", "--out", &w.s("abs.json")][..], &base].concat());
    let stdout = ok(&["evaluate", "--report", &w.s("abs.json"), "--against", &w.s("gt.json"), "--out", &w.s("cmp.json")]);
    assert!(stdout.contains("abstract: n="));
    let cmp = json(&w.p("cmp.json"));
    assert!(cmp[0]["fk_grade"]["test"]["t"].is_f64());
    assert!(cmp[0]["fk_grade"]["test"]["p_two_sided"].is_f64());

    ok(&["report", "--reports", &w.s("abs.json"), &w.s("gt.json"), "--comparisons", &w.s("cmp.json"), "--out", &w.s("table.json")]);
    let table = json(&w.p("table.json"));
    assert_eq!(table["grade_target"], 8.0);
    assert_eq!(table["readability"].as_array().unwrap().len(), 2);
    assert_eq!(table["readability"][1]["fk_p"], "/");
    ok(&["report", "--reports", &w.s("abs.json"), "--format", "csv", "--out", &w.s("rows.csv")]);
    assert!(std::fs::read_to_string(w.p("rows.csv")).unwrap().starts_with("system_id,sample_id,fk_grade"));
}

#[test]
fn export_and_job() {
    let w = Work::new();
    let stdout = ok(&["export-ft", "--corpus", &w.s("corpus.jsonl"), "--split", &w.s("split.json"), "--out", &w.s("train.jsonl")]);
    assert!(stdout.contains("records"));
    ok(&["ft-job", "--training-file", &w.s("train.jsonl"), "--out", &w.s("job.json")]);
    let job = json(&w.p("job.json"));
    assert_eq!(job["seed"], 741667963);
    assert_eq!(job["hyperparameters"]["n_epochs"], 3);
    assert_eq!(job["hyperparameters"]["batch_size"], 1);
    assert_eq!(job["hyperparameters"]["learning_rate_multiplier"], 2.0);
}

#[test]
fn config_file_and_flag_precedence() {
    let w = Work::new();
    std::fs::write(w.p("c.toml"), "seed = 99\nratio = 0.5\n[finetune]\nepochs = 5\n").unwrap();
    ok(&["--config", &w.s("c.toml"), "split", "--corpus", &w.s("corpus.jsonl"), "--seed", "1", "--out", &w.s("s.json")]);
    let s = json(&w.p("s.json"));
    assert_eq!((s["seed"].as_u64(), s["ratio"].as_f64()), (Some(1), Some(0.5)));
    ok(&["export-ft", "--corpus", &w.s("corpus.jsonl"), "--split", &w.s("split.json"), "--out", &w.s("t.jsonl")]);
    ok(&["--config", &w.s("c.toml"), "ft-job", "--training-file", &w.s("t.jsonl"), "--out", &w.s("j.json")]);
    assert_eq!(json(&w.p("j.json"))["hyperparameters"]["n_epochs"], 5);
}

#[test]
fn exit_codes() {
    let w = Work::new();
    assert_eq!(run(&["adapt", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["ingest", "--input", "/nonexistent.json", "--out", &w.s("x.jsonl")]).status.code(), Some(3));
    std::fs::write(w.p("bad.toml"), "nope = 1\n").unwrap();
    assert_eq!(run(&["--config", &w.s("bad.toml"), "split", "--corpus", &w.s("corpus.jsonl"), "--out", &w.s("s.json")]).status.code(), Some(3));
    let unreachable = Command::new(env!("CARGO_BIN_EXE_plainlang"))
        .args(["adapt", "--corpus", &w.s("corpus.jsonl"), "--split", &w.s("split.json"), "--strategy", "baseline", "--backend", "http"])
        .args(["--max-retries", "0", "--limit", "1", "--out", &w.s("r.jsonl")])
        .env("PLAINLANG_API_KEY", "test")
        .env("PLAINLANG_API_BASE", "http://127.0.0.1:9")
        .output()
        .unwrap();
    assert_eq!(unreachable.status.code(), Some(4), "{}", String::from_utf8_lossy(&unreachable.stderr));
    // The partial run still gets its manifest.
    assert!(w.p("r.jsonl.manifest.json").exists());
}
