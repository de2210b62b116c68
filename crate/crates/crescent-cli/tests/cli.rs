//! End-to-end tests of the `crescent` binary: exit codes, stdout contract,
//! and on-disk artifacts, all against the scripted mock backend.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn crescent() -> Command {
    Command::new(env!("CARGO_BIN_EXE_crescent"))
}

fn run(args: &[&str]) -> Output {
    crescent().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Three-question script: bait calls yield distinct questions, each
/// question gets a 3-sample answer set with a clear majority.
fn write_script(path: &Path) {
    let lines = [
        r#####"{"match_rule":"contains:multi-step reasoning","completions":["A train travels 60 miles in 2 hours. How far in 5 hours?"]}"#####,
        r#####"{"match_rule":"contains:multi-step reasoning","completions":["A baker sells 12 loaves at 3 dollars each. Revenue?"]}"#####,
        r#####"{"match_rule":"contains:multi-step reasoning","completions":["Lena reads 15 pages a day for 4 days. Total pages?"]}"#####,
        r#####"{"match_rule":"contains:train travels 60","completions":["30 mph so 30*5 = 150. #### 150","#### 150","#### 140"]}"#####,
        r#####"{"match_rule":"contains:baker sells 12","completions":["12*3 = 36. #### 36","#### 36","#### 36"]}"#####,
        r#####"{"match_rule":"contains:reads 15 pages","completions":["15*4 = 60. #### 60","#### 60","no idea"]}"#####,
    ];
    std::fs::write(path, lines.join("\n") + "\n").unwrap();
}

fn write_config(dir: &Path) -> PathBuf {
    let script = dir.join("script.jsonl");
    write_script(&script);
    let config = dir.join("config.toml");
    std::fs::write(
        &config,
        format!(
            r#"
[run]
target_question_count = 3
samples_per_question = 3
output_dir = "{}"

[generation]
backend = "scripted_mock"
mock_script = "{}"
retry_base_ms = 1

[embedding]
dimension = 32
"#,
            dir.join("run").display(),
            script.display()
        ),
    )
    .unwrap();
    config
}

#[test]
fn test_synthesize_writes_dataset_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out = run(&["synthesize", "--config", config.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("synthesized 3 pairs from 3 raw questions"));
    let dataset = dir.path().join("run/dataset.sft.jsonl");
    assert!(dataset.exists());
    assert_eq!(std::fs::read_to_string(dataset).unwrap().lines().count(), 3);
}

#[test]
fn test_synthesize_missing_config_is_config_error() {
    let out = run(&["synthesize", "--config", "/nonexistent/config.toml"]);
    assert_eq!(out.status.code(), Some(1), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("error:"));
}

#[test]
fn test_synthesize_invalid_toml_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "run = not valid toml [").unwrap();
    let out = run(&["synthesize", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn test_synthesize_default_config_needs_endpoint() {
    // The built-in defaults select the HTTP backend with no endpoint set.
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "synthesize",
        "--output-dir",
        dir.path().join("run").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1), "stderr: {}", stderr(&out));
}

#[test]
fn test_synthesize_exhausted_script_is_stage_failure() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("script.jsonl");
    // One bait entry (sticky) but nothing matches the answer requests.
    std::fs::write(
        &script,
        r#####"{"match_rule":"contains:multi-step reasoning","completions":["Q one?"]}"#####,
    )
    .unwrap();
    let out = run(&[
        "synthesize",
        "--mock-script",
        script.to_str().unwrap(),
        "--target-count",
        "1",
        "--output-dir",
        dir.path().join("run").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
}

#[test]
fn test_corrupt_checkpoint_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out = run(&["synthesize", "--config", config.to_str().unwrap()]);
    assert!(out.status.success());

    // Damage a checkpoint line in the middle of the raw-questions file.
    let raw = dir.path().join("run/01_raw.jsonl");
    let text = std::fs::read_to_string(&raw).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines[1] = "{ this is not json";
    std::fs::write(&raw, lines.join("\n") + "\n").unwrap();

    let out = run(&["synthesize", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr(&out));
}

#[test]
fn test_stats_prints_and_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    assert!(run(&["synthesize", "--config", config.to_str().unwrap()]).status.success());

    let run_dir = dir.path().join("run");
    let stats_path = run_dir.join("stats.json");
    let out1 = run(&["stats", run_dir.to_str().unwrap()]);
    assert!(out1.status.success(), "stderr: {}", stderr(&out1));
    assert!(stdout(&out1).contains("\"dataset_pairs\": 3"));
    let bytes1 = std::fs::read(&stats_path).unwrap();

    let out2 = run(&["stats", run_dir.to_str().unwrap()]);
    assert!(out2.status.success());
    let bytes2 = std::fs::read(&stats_path).unwrap();
    assert_eq!(bytes1, bytes2, "stats must be idempotent");
}

#[test]
fn test_stats_on_empty_dir_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["stats", dir.path().to_str().unwrap()]);
    assert_ne!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("error:"));
}

#[test]
fn test_export_embeddings_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    assert!(run(&["synthesize", "--config", config.to_str().unwrap()]).status.success());

    let run_dir = dir.path().join("run");
    let csv = run_dir.join("embeddings.csv");
    std::fs::remove_file(&csv).unwrap();
    let out = run(&["export-embeddings", run_dir.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("exported 3 embeddings"));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 4, "header plus three rows");
}

fn write_benchmark(path: &Path, n: usize) {
    let mut text = String::new();
    for i in 0..n {
        text.push_str(&format!(
            r#####"{{"question":"bench question {i}?","answer":"work shown #### {i}"}}"#####
        ));
        text.push('\n');
    }
    std::fs::write(path, text).unwrap();
}

/// Script answering items 0..7 with their gold number and the rest wrongly.
fn write_eval_script(path: &Path) {
    let mut lines: Vec<String> = Vec::new();
    for i in 0..7 {
        lines.push(format!(
            r#####"{{"match_rule":"contains:bench question {i}?","completions":["the answer is #### {i}"]}}"#####
        ));
    }
    for i in 7..10 {
        lines.push(format!(
            r#####"{{"match_rule":"contains:bench question {i}?","completions":["no clue, maybe 99999"]}}"#####
        ));
    }
    std::fs::write(path, lines.join("\n") + "\n").unwrap();
}

fn eval_config(dir: &Path, script: &Path) -> PathBuf {
    let config = dir.join("eval-config.toml");
    std::fs::write(
        &config,
        format!(
            r#"
[generation]
backend = "scripted_mock"
mock_script = "{}"
retry_base_ms = 1

[embedding]
dimension = 32
"#,
            script.display()
        ),
    )
    .unwrap();
    config
}

#[test]
fn test_evaluate_prints_exact_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let bench = dir.path().join("bench.jsonl");
    write_benchmark(&bench, 10);
    let script = dir.path().join("eval-script.jsonl");
    write_eval_script(&script);
    let config = eval_config(dir.path(), &script);

    let out_dir = dir.path().join("eval-run");
    let out = run(&[
        "evaluate",
        "--config",
        config.to_str().unwrap(),
        "--data",
        bench.to_str().unwrap(),
        "--shots",
        "0",
        "--output-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(
        stdout(&out).contains("accuracy 70.0% (7/10) at 0 shots"),
        "stdout: {}",
        stdout(&out)
    );
    assert!(out_dir.join("eval_records.jsonl").exists());
    assert!(out_dir.join("eval_summary.json").exists());
}

#[test]
fn test_evaluate_small_train_pool_fails() {
    let dir = tempfile::tempdir().unwrap();
    let bench = dir.path().join("bench.jsonl");
    write_benchmark(&bench, 10);
    let train = dir.path().join("train.jsonl");
    write_benchmark(&train, 3);
    let script = dir.path().join("eval-script.jsonl");
    write_eval_script(&script);
    let config = eval_config(dir.path(), &script);

    let out = run(&[
        "evaluate",
        "--config",
        config.to_str().unwrap(),
        "--data",
        bench.to_str().unwrap(),
        "--train",
        train.to_str().unwrap(),
        "--shots",
        "5",
        "--output-dir",
        dir.path().join("eval-run").to_str().unwrap(),
    ]);
    assert_ne!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("few-shot pool too small"), "stderr: {}", stderr(&out));
}

#[test]
fn test_help_exits_zero_and_unknown_flag_exits_one() {
    let help = run(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("synthesize"));

    let bad = run(&["synthesize", "--not-a-flag"]);
    assert_eq!(bad.status.code(), Some(1));
}
