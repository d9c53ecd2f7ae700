//! Drives the compiled binary end to end on a miniature workspace:
//! ingest, score, run and report against generated articles and prices,
//! checking exit codes, JSON summaries and produced files.

mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chrono::NaiveDate;

use common::*;

const BIN: &str = env!("CARGO_BIN_EXE_senticast");
const ASSETS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/assets");

/// Lay out config, articles, aliases and price files under `root`.
fn build_workspace(root: &Path) -> PathBuf {
    let data = root.join("data");
    std::fs::create_dir_all(data.join("prices")).unwrap();

    let dates = trading_dates(NaiveDate::from_ymd_opt(2019, 1, 1).unwrap(), 40);
    for (i, aliases) in test_aliases().iter().enumerate() {
        let series = random_walk_prices(&aliases.ticker, 40, 500 + i as u64);
        write_price_csv(&data.join("prices").join(format!("{}.csv", aliases.ticker)), &series);
    }
    // DELTA exists but is far too short to train on; the sweep must record
    // it as a failure and keep going.
    let short = random_walk_prices("DELTA", 8, 900);
    write_price_csv(&data.join("prices").join("DELTA.csv"), &short);

    write_articles_jsonl(&data.join("articles.jsonl"), &synthetic_articles(&dates, 2));
    let mut aliases = test_aliases();
    aliases.push(senticast::corpus::TickerAliases::new("DELTA", &["Delta Group"]));
    write_aliases_csv(&data.join("aliases.csv"), &aliases);

    let config = format!(
        r#"[paths]
articles = "data/articles.jsonl"
vader_lexicon = "{assets}/vader_valence.tsv"
hiv4_positive = "{assets}/hiv4_positive.txt"
hiv4_negative = "{assets}/hiv4_negative.txt"
lm_positive = "{assets}/lm_positive.txt"
lm_negative = "{assets}/lm_negative.txt"
prices_dir = "data/prices"
aliases = "data/aliases.csv"
results_dir = "results"

[calendar]
start = "2019-01-01"
end = "2019-12-31"

[model]
lookback = 4
horizon = 2
holdout = 6

[train]
epochs = 2
batch_size = 4
learning_rate = 0.001

[run]
seed = 11
tickers = ["ALPHA", "BETA", "GAMMA"]
"#,
        assets = ASSETS
    );
    let path = root.join("senticast.toml");
    std::fs::write(&path, config).unwrap();
    path
}

fn run(config: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .arg("--config")
        .arg(config)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    serde_json::from_slice(&output.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}):\n{}\nstderr:\n{}",
            String::from_utf8_lossy(&output.stdout),
            String::from_utf8_lossy(&output.stderr)
        )
    })
}

#[test]
fn pipeline_commands_work_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let config = build_workspace(dir.path());

    // Ingest: all generated articles survive cleaning and deduplication.
    let out = run(&config, &["ingest"]);
    assert!(out.status.success(), "ingest failed: {}", String::from_utf8_lossy(&out.stderr));
    let summary = stdout_json(&out);
    assert_eq!(summary["read"], 80);
    assert_eq!(summary["deduped"], 80);
    assert_eq!(summary["skipped"], 0);

    // Score: nine daily series per ticker (3 sections x 3 libraries).
    let out = run(&config, &["score"]);
    assert!(out.status.success(), "score failed: {}", String::from_utf8_lossy(&out.stderr));
    let summary = stdout_json(&out);
    assert_eq!(summary["series_written"], 27);
    let series = dir.path().join("results/sentiment/ALPHA/heading_vader.csv");
    let text = std::fs::read_to_string(&series).unwrap();
    assert!(text.starts_with("date,value\n"), "unexpected series header in {text:?}");
    assert!(text.lines().count() > 1, "series should cover at least one day");

    // Run a trimmed sweep; everything requested succeeds, so exit code 0.
    let out = run(
        &config,
        &["--jobs", "1", "run", "--tickers", "ALPHA,BETA", "--variants",
          "one_feature,five_feature_senti_head_vader"],
    );
    assert!(out.status.success(), "run failed: {}", String::from_utf8_lossy(&out.stderr));
    let summary = stdout_json(&out);
    assert_eq!(summary["runs"], 4, "2 tickers x 2 configurations");
    assert_eq!(summary["failures"].as_array().unwrap().len(), 0);
    assert!(dir.path().join("results/runs/ALPHA/one_feature.json").is_file());
    assert!(dir
        .path()
        .join("results/runs/BETA/five_feature_senti_head_vader.json")
        .is_file());
    let best = std::fs::read_to_string(dir.path().join("results/tables/best_variant.csv")).unwrap();
    assert!(best.starts_with("ticker,best_variant,mape\n"));
    assert_eq!(best.lines().count(), 3, "header plus one row per ticker:\n{best}");

    // Report rebuilds tables from the stored results alone.
    std::fs::remove_dir_all(dir.path().join("results/tables")).unwrap();
    let out = run(&config, &["report"]);
    assert!(out.status.success(), "report failed: {}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("results/tables/library_winners.txt").is_file());
}

#[test]
fn sweep_records_partial_failures_with_exit_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = build_workspace(dir.path());
    // Add the too-short ticker to the configured list.
    let text = std::fs::read_to_string(&config_path)
        .unwrap()
        .replace("\"GAMMA\"]", "\"GAMMA\", \"DELTA\"]");
    std::fs::write(&config_path, text).unwrap();

    let out = run(&config_path, &["--jobs", "1", "run", "--variants", "one_feature"]);
    assert_eq!(out.status.code(), Some(1), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let summary = stdout_json(&out);
    assert_eq!(summary["runs"], 3, "the three healthy tickers still complete");
    let failures = summary["failures"].as_array().unwrap();
    assert_eq!(failures.len(), 1);
    assert_eq!(failures[0]["ticker"], "DELTA");
}

#[test]
fn broken_configuration_is_fatal_with_exit_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = build_workspace(dir.path());

    // A ticker without a price file fails validation before any work.
    let text = std::fs::read_to_string(&config_path)
        .unwrap()
        .replace("\"GAMMA\"]", "\"GAMMA\", \"MISSING\"]");
    std::fs::write(&config_path, text).unwrap();
    let out = run(&config_path, &["ingest"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("MISSING"), "error should name the ticker: {stderr}");

    // As is a config file that does not parse at all.
    std::fs::write(&config_path, "not = valid = toml").unwrap();
    let out = run(&config_path, &["report"]);
    assert_eq!(out.status.code(), Some(2));
}
