use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lexpara::pipeline::{parse_records, write_toy_fixture, FixtureSpec};

fn lexpara(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lexpara")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn fixture(dir: &Path) -> String {
    let spec = FixtureSpec {
        references: 8,
        bitext_pairs: 800,
        quality_examples: 100,
        ..Default::default()
    };
    write_toy_fixture(dir, &spec).unwrap().to_str().unwrap().to_owned()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_owned()
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(lexpara(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(lexpara(&["generate"]).status.code(), Some(1));
    let o = lexpara(&["generate", "--out", "x.jsonl"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--config"));
    assert_eq!(lexpara(&["--help"]).status.code(), Some(0));
}

#[test]
fn bad_overrides_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture(dir.path());
    assert_eq!(lexpara(&["--config", &cfg, "--systems", "0-3", "build"]).status.code(), Some(1));
    assert_eq!(lexpara(&["--config", &cfg, "--jobs", "0", "build"]).status.code(), Some(1));
    assert_eq!(lexpara(&["--config", &cfg, "build", "everything"]).status.code(), Some(1));
}

#[test]
fn data_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture(dir.path());
    let o = lexpara(&["--config", &cfg, "generate", "--out", &path(dir.path(), "o.jsonl")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("lexpara build idf"), "{}", stderr(&o));

    let o = lexpara(&["dedup", "--input", &path(dir.path(), "absent.jsonl"), "--out", "x"]);
    assert_eq!(o.status.code(), Some(2));

    fs::write(dir.path().join("bad.jsonl"), "{\"sentence_id\": 1}\n").unwrap();
    let o = lexpara(&["eval-diversity", "--input", &path(dir.path(), "bad.jsonl")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.jsonl:1:"), "{}", stderr(&o));
}

#[test]
fn build_prints_hash_per_target() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture(dir.path());
    let all = lexpara(&["--config", &cfg, "build"]);
    assert!(all.status.success(), "{}", stderr(&all));
    let lines: Vec<String> = stdout(&all).lines().map(str::to_owned).collect();
    let names: Vec<&str> = lines.iter().map(|l| l.split('\t').next().unwrap()).collect();
    assert_eq!(names, ["idf", "bpe", "scorer", "lexicon", "ppdb-index"]);
    for l in &lines {
        let hash = l.split('\t').nth(1).unwrap();
        assert_eq!(hash.len(), 64);
    }
    let one = lexpara(&["--config", &cfg, "build", "scorer"]);
    assert_eq!(stdout(&one).trim_end(), lines[2]);
}

#[test]
fn pipeline_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture(dir.path());
    let d = dir.path();
    assert!(lexpara(&["--config", &cfg, "build"]).status.success());

    let o = lexpara(&["--config", &cfg, "--systems", "21,28", "generate", "--out", &path(d, "gen.jsonl")]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("8/8 references"));
    let records = parse_records(&fs::read_to_string(d.join("gen.jsonl")).unwrap(), "gen").unwrap();
    assert!(records.iter().all(|r| r.systems == [21] || r.systems == [28]));

    let o = lexpara(&["dedup", "--input", &path(d, "gen.jsonl"), "--out", &path(d, "dedup.jsonl")]);
    assert!(o.status.success());
    let merged = parse_records(&fs::read_to_string(d.join("dedup.jsonl")).unwrap(), "dedup").unwrap();
    assert!(merged.len() <= records.len());

    let o = lexpara(&["eval-diversity", "--input", &path(d, "dedup.jsonl")]);
    let table = stdout(&o);
    assert!(table.starts_with("system\t5\t10\t20\t40\taverage\tall"), "{table}");
    assert_eq!(table.lines().filter(|l| !l.starts_with('#')).count(), 3);

    let o = lexpara(&["eval-diversity", "--json", "--input", &path(d, "dedup.jsonl")]);
    let json: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(json["systems"].as_array().unwrap().len(), 2);

    let quality = path(d, "quality.tsv");
    let model = path(d, "model.json");
    assert!(lexpara(&["--config", &cfg, "train-quality", "--data", &quality, "--out", &model]).status.success());
    let o = lexpara(&["--config", &cfg, "score", "--input", &path(d, "dedup.jsonl"), "--model", &model, "--out", &path(d, "s.jsonl")]);
    assert!(o.status.success(), "{}", stderr(&o));
    let scored = parse_records(&fs::read_to_string(d.join("s.jsonl")).unwrap(), "s").unwrap();
    assert!(scored.iter().all(|r| r.predicted_quality.is_some_and(|q| (0.0..=100.0).contains(&q))));
}

#[test]
fn annotation_reports() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path());
    let ann = path(dir.path(), "annotations.tsv");
    let o = lexpara(&["aggregate-easl", "--input", &ann]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("system\tmean\titems\n"));
    assert!(text.contains("# disqualified: "));

    let o = lexpara(&["aggregate-easl", "--json", "--fail-rate", "1.0", "--input", &ann]);
    let json: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(json["disqualified"].as_array().unwrap().is_empty());

    let o = lexpara(&["fluency-report", "--input", &ann]);
    let rows: Vec<String> = stdout(&o).lines().skip(1).map(str::to_owned).collect();
    assert_eq!(rows.len(), 5);
    for r in rows {
        let rate: f64 = r.split('\t').nth(1).unwrap().parse().unwrap();
        assert!((0.0..=100.0).contains(&rate));
    }
}

#[test]
fn toy_fixture_command_writes_a_loadable_config() {
    let dir = tempfile::tempdir().unwrap();
    let target = path(dir.path(), "toy");
    let o = lexpara(&["--seed", "3", "toy-fixture", "--dir", &target, "--references", "4", "--bitext", "200"]);
    assert!(o.status.success());
    let cfg = stdout(&o).trim().to_owned();
    let text = fs::read_to_string(&cfg).unwrap();
    assert!(text.contains("seed = 3"));
    assert_eq!(fs::read_to_string(dir.path().join("toy/references.tsv")).unwrap().lines().count(), 4);
}
