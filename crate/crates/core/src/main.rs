//! Command-line front end: ingest, score, run and report, driven by one
//! TOML config. Progress goes to standard error; each command prints a
//! JSON summary to standard output. Exit codes: 0 success, 1 completed
//! with partial failures, 2 fatal.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use senticast::config::PipelineConfig;
use senticast::corpus::{self, ArticleFormat, Section, TickerAliases};
use senticast::dataset::{load_prices, PriceSeries};
use senticast::experiment::{
    load_all, render_best_variant, render_library_winners, render_section_winners, run_all,
    table_best_variant, table_library_winners, table_section_winners, write_best_variant_csv,
    write_library_winners_csv, write_section_winners_csv, RunFailure, RunResult, SweepConfig,
    TickerData, VariantSpec,
};
use senticast::lexicon::{load_categorical_lexicon, load_valence_lexicon, CategoricalKind, LexiconSet};
use senticast::sentiment::{aggregate_daily, score_corpus, Library};
use senticast::{Error, Result};

#[derive(Parser)]
#[command(
    name = "senticast",
    about = "News-sentiment stock forecasting: score articles, train LSTM variants, compare MAPE",
    version
)]
struct Cli {
    /// Pipeline config file.
    #[arg(long, global = true, default_value = "senticast.toml")]
    config: PathBuf,
    /// Override the config's global seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for the sweep (default: logical cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Reuse results already on disk instead of recomputing them.
    #[arg(long, global = true)]
    resume: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Read, clean and deduplicate the article dump; print counts.
    Ingest,
    /// Score articles and write per-ticker daily sentiment series.
    Score,
    /// Train and evaluate configurations, then emit the summary tables.
    Run {
        /// Subset of configured tickers (comma-separated).
        #[arg(long, value_delimiter = ',')]
        tickers: Vec<String>,
        /// Subset of configurations, e.g. one_feature,five_feature_senti_head_vader.
        #[arg(long, value_delimiter = ',')]
        variants: Vec<String>,
    },
    /// Rebuild the summary tables from results already on disk.
    Report,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<ExitCode> {
    let mut config = PipelineConfig::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        config.run.seed = seed;
    }
    config.validate()?;
    match &cli.command {
        Command::Ingest => cmd_ingest(&config),
        Command::Score => cmd_score(&config),
        Command::Run { tickers, variants } => cmd_run(&config, cli, tickers, variants),
        Command::Report => cmd_report(&config),
    }
}

/// Parse and clean the article dump, logging per-record warnings.
fn ingest(config: &PipelineConfig) -> Result<corpus::IngestOutcome> {
    let path = &config.paths.articles;
    let outcome = corpus::ingest_articles(path, ArticleFormat::from_path(path))?;
    for warning in &outcome.warnings {
        log::warn!("{}: {warning}", path.display());
    }
    Ok(outcome)
}

fn cmd_ingest(config: &PipelineConfig) -> Result<ExitCode> {
    let outcome = ingest(config)?;
    print_json(&json!({
        "read": outcome.read,
        "cleaned": outcome.cleaned,
        "deduped": outcome.articles.len(),
        "skipped": outcome.skipped,
        "warnings": outcome.warnings.len(),
    }))?;
    Ok(ExitCode::SUCCESS)
}

fn load_lexicons(config: &PipelineConfig) -> Result<LexiconSet> {
    let (vader, warnings) = load_valence_lexicon(&config.paths.vader_lexicon)?;
    log_warnings(&config.paths.vader_lexicon, &warnings);
    let (hiv4, warnings) = load_categorical_lexicon(
        &config.paths.hiv4_positive,
        &config.paths.hiv4_negative,
        CategoricalKind::Hiv4,
    )?;
    log_warnings(&config.paths.hiv4_positive, &warnings);
    let (lm, warnings) = load_categorical_lexicon(
        &config.paths.lm_positive,
        &config.paths.lm_negative,
        CategoricalKind::Lm,
    )?;
    log_warnings(&config.paths.lm_positive, &warnings);
    Ok(LexiconSet::new(vader, hiv4, lm))
}

fn log_warnings(path: &Path, warnings: &[String]) {
    for warning in warnings {
        log::warn!("{}: {warning}", path.display());
    }
}

/// Aliases for the configured tickers; a configured ticker without an
/// alias row is a config error, since its articles could never match.
fn load_aliases_for(config: &PipelineConfig, tickers: &[String]) -> Result<Vec<TickerAliases>> {
    let (all, warnings) = corpus::load_aliases(&config.paths.aliases)?;
    log_warnings(&config.paths.aliases, &warnings);
    tickers
        .iter()
        .map(|ticker| {
            all.iter()
                .find(|a| &a.ticker == ticker)
                .cloned()
                .ok_or_else(|| {
                    Error::Config(format!(
                        "ticker {ticker} has no row in {}",
                        config.paths.aliases.display()
                    ))
                })
        })
        .collect()
}

/// Load one ticker's prices and keep only rows inside the calendar bounds.
fn load_bounded_prices(config: &PipelineConfig, ticker: &str) -> Result<PriceSeries> {
    let (mut series, warnings) = load_prices(&config.price_path(ticker), ticker, 1)?;
    log_warnings(&config.price_path(ticker), &warnings);
    series
        .rows
        .retain(|r| r.date >= config.calendar.start && r.date <= config.calendar.end);
    if series.len() < config.min_price_rows() {
        return Err(Error::InsufficientData {
            rows: series.len(),
            needed: config.min_price_rows(),
        });
    }
    Ok(series)
}

fn cmd_score(config: &PipelineConfig) -> Result<ExitCode> {
    let outcome = ingest(config)?;
    let lexicons = load_lexicons(config)?;
    let aliases = load_aliases_for(config, &config.run.tickers)?;
    let scores = score_corpus(&outcome.articles, &lexicons, &Section::ALL, &Library::ALL);

    let sentiment_dir = config.paths.results_dir.join("sentiment");
    let mut series_written = 0usize;
    for alias in &aliases {
        let prices = load_bounded_prices(config, &alias.ticker)?;
        let calendar = prices.calendar();
        let ticker_dir = sentiment_dir.join(&alias.ticker);
        std::fs::create_dir_all(&ticker_dir).map_err(|e| Error::write(&ticker_dir, e))?;
        for section in Section::ALL {
            for library in Library::ALL {
                let series = aggregate_daily(
                    &scores,
                    &outcome.articles,
                    alias,
                    section,
                    library,
                    &calendar,
                    config.calendar.cutoff_hour,
                );
                let path = ticker_dir.join(format!("{section}_{library}.csv"));
                let mut buf = Vec::new();
                series.write_csv(&mut buf)?;
                std::fs::write(&path, buf).map_err(|e| Error::write(&path, e))?;
                series_written += 1;
            }
        }
        log::info!("{}: sentiment series written", alias.ticker);
    }

    print_json(&json!({
        "articles_scored": outcome.articles.len(),
        "tickers": aliases.len(),
        "series_written": series_written,
        "output_dir": sentiment_dir,
    }))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_run(
    config: &PipelineConfig,
    cli: &Cli,
    ticker_filter: &[String],
    variant_filter: &[String],
) -> Result<ExitCode> {
    let tickers = select_tickers(config, ticker_filter)?;
    let specs = select_specs(variant_filter)?;
    let needs_sentiment = specs.iter().any(|s| s.variant.uses_sentiment());

    // Price-only sweeps skip the scoring inputs entirely.
    let (articles, lexicons) = if needs_sentiment {
        (ingest(config)?.articles, load_lexicons(config)?)
    } else {
        (
            Vec::new(),
            senticast::lexicon::bundled::lexicon_set(),
        )
    };

    let aliases = load_aliases_for(config, &tickers)?;
    let mut data = Vec::new();
    let mut failures: Vec<RunFailure> = Vec::new();
    for alias in aliases {
        match load_bounded_prices(config, &alias.ticker) {
            Ok(prices) => data.push(TickerData { aliases: alias, prices }),
            Err(e) => {
                log::warn!("{}: skipped: {e}", alias.ticker);
                failures.push(RunFailure {
                    ticker: alias.ticker.clone(),
                    variant_name: "load".to_string(),
                    error: e.to_string(),
                });
            }
        }
    }
    if data.is_empty() {
        return Err(Error::Config("no ticker has usable price data".to_string()));
    }

    let sweep = SweepConfig {
        train: config.train_config(config.run.seed),
        lookback: config.model.lookback,
        horizon: config.model.horizon,
        holdout: config.model.holdout,
        cutoff_hour: config.calendar.cutoff_hour,
        global_seed: config.run.seed,
        results_dir: config.paths.results_dir.join("runs"),
        resume: cli.resume,
        jobs: cli.jobs,
        specs,
    };
    let outcome = run_all(&data, &articles, &lexicons, &sweep)?;
    failures.extend(outcome.failures.iter().cloned());

    let table_dir = config.paths.results_dir.join("tables");
    let table_files = emit_tables(&outcome.results, &table_dir)?;

    print_json(&json!({
        "runs": outcome.results.len(),
        "reused": outcome.reused,
        "failures": failures,
        "tables": table_files,
    }))?;
    Ok(if failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_report(config: &PipelineConfig) -> Result<ExitCode> {
    let runs_dir = config.paths.results_dir.join("runs");
    let (results, warnings) = load_all(&runs_dir)?;
    for warning in &warnings {
        log::warn!("{warning}");
    }
    if results.is_empty() {
        return Err(Error::Config(format!(
            "no results under {}; run the sweep first",
            runs_dir.display()
        )));
    }
    let table_dir = config.paths.results_dir.join("tables");
    let table_files = emit_tables(&results, &table_dir)?;
    print_json(&json!({
        "runs": results.len(),
        "tables": table_files,
    }))?;
    Ok(ExitCode::SUCCESS)
}

fn select_tickers(config: &PipelineConfig, filter: &[String]) -> Result<Vec<String>> {
    if filter.is_empty() {
        return Ok(config.run.tickers.clone());
    }
    for ticker in filter {
        if !config.run.tickers.contains(ticker) {
            return Err(Error::Config(format!(
                "ticker {ticker} is not in the configured list"
            )));
        }
    }
    Ok(filter.to_vec())
}

fn select_specs(filter: &[String]) -> Result<Vec<VariantSpec>> {
    if filter.is_empty() {
        return Ok(VariantSpec::all());
    }
    filter.iter().map(|name| name.parse()).collect()
}

/// Write all three tables as CSV and aligned text; returns the file list.
fn emit_tables(results: &[RunResult], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::write(dir, e))?;
    let best = table_best_variant(results);
    let sections = table_section_winners(results);
    let libraries = table_library_winners(results);

    let mut files = Vec::new();
    let mut write = |name: &str, bytes: Vec<u8>| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| Error::write(&path, e))?;
        files.push(path);
        Ok(())
    };

    let mut buf = Vec::new();
    write_best_variant_csv(&best, &mut buf)?;
    write("best_variant.csv", buf)?;
    write("best_variant.txt", render_best_variant(&best).into_bytes())?;

    let mut buf = Vec::new();
    write_section_winners_csv(&sections, &mut buf)?;
    write("section_winners.csv", buf)?;
    write(
        "section_winners.txt",
        render_section_winners(&sections).into_bytes(),
    )?;

    let mut buf = Vec::new();
    write_library_winners_csv(&libraries, &mut buf)?;
    write("library_winners.csv", buf)?;
    write(
        "library_winners.txt",
        render_library_winners(&libraries).into_bytes(),
    )?;

    Ok(files)
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    println!(
        "{}",
        serde_json::to_string_pretty(value).map_err(Error::Json)?
    );
    Ok(())
}
