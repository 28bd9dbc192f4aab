//! End-to-end checks of the command-line interface: subcommands, config
//! handling, artifact creation, and exit codes (0 success, 1 usage error,
//! 2 data/config error).

use std::path::{Path, PathBuf};
use std::process::Command;

use storychain::synth::{generate, SynthConfig};

const BIN: &str = env!("CARGO_BIN_EXE_storychain");

fn write_corpus(dir: &Path) -> PathBuf {
    let synth = generate(&SynthConfig {
        n_stories: 3,
        story_size_min: 3,
        story_size_max: 5,
        n_noise: 20,
        span_days: 10,
        seed: 5,
    });
    let path = dir.join("corpus.jsonl");
    let mut text = String::new();
    for a in &synth.articles {
        text.push_str(&serde_json::to_string(a).unwrap());
        text.push('\n');
    }
    std::fs::write(&path, text).unwrap();
    path
}

fn write_config(dir: &Path, corpus: &Path) -> PathBuf {
    let out = dir.join("out");
    let text = format!(
        "corpus_path = {}\noutput_dir = {}\ntheta_keyword = 0.35\ntheta_bm25f = 0.35\ntheta_ensemble = 0.35\nmin_cluster = 3\n",
        corpus.display(),
        out.display()
    );
    let path = dir.join("pipeline.conf");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn run_subcommand_produces_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path());
    let config = write_config(dir.path(), &corpus);
    let status = Command::new(BIN)
        .args(["run", "--config"])
        .arg(&config)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    for name in ["corpus.jsonl", "stats.json", "edges.tsv", "tree.txt", "size_table.csv"] {
        assert!(dir.path().join("out").join(name).exists(), "{name} missing");
    }
}

#[test]
fn set_overrides_config_values() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path());
    let out = dir.path().join("other_out");
    let status = Command::new(BIN)
        .args(["ingest", "-s"])
        .arg(format!("corpus_path={}", corpus.display()))
        .args(["-s"])
        .arg(format!("output_dir={}", out.display()))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out.join("stats.json").exists());
}

#[test]
fn usage_errors_exit_1() {
    let status = Command::new(BIN).arg("no-such-command").status().unwrap();
    assert_eq!(status.code(), Some(1));
    let status = Command::new(BIN).status().unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn help_exits_0() {
    let status = Command::new(BIN).arg("--help").status().unwrap();
    assert_eq!(status.code(), Some(0));
}

#[test]
fn data_errors_exit_2() {
    // missing corpus file
    let status = Command::new(BIN)
        .args(["cluster", "-s", "corpus_path=/nonexistent/corpus.jsonl"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // eval without labels_path is a config error
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path());
    let status = Command::new(BIN)
        .args(["eval", "-s"])
        .arg(format!("corpus_path={}", corpus.display()))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // bad config value
    let status = Command::new(BIN)
        .args(["ingest", "-s", "teleport=2.0"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn stats_without_tree_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path());
    let out = dir.path().join("empty_out");
    let status = Command::new(BIN)
        .args(["stats", "-s"])
        .arg(format!("corpus_path={}", corpus.display()))
        .args(["-s"])
        .arg(format!("output_dir={}", out.display()))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}
