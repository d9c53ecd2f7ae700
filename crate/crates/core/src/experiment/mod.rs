//! The full evaluation sweep: fourteen feature/library configurations per
//! ticker, each trained and scored on the trailing holdout, with
//! crash-tolerant persistence and the three summary tables.

mod store;
mod tables;

pub use store::{load_all, load_result, result_path, save_result};
pub use tables::{
    render_best_variant, render_library_winners, render_section_winners, table_best_variant,
    table_library_winners, table_section_winners, write_best_variant_csv,
    write_library_winners_csv, write_section_winners_csv, BestVariantRow, WinnersRow,
};

use std::collections::HashMap;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{Article, Section, TickerAliases};
use crate::dataset::{
    apply_scaler, build_features, fit_scaler, window, PriceSeries, Variant, HOLDOUT, HORIZON,
    LOOKBACK,
};
use crate::error::{Error, Result};
use crate::lexicon::LexiconSet;
use crate::lstm::{init_model, predict_horizon, train, TrainConfig};
use crate::sentiment::{aggregate_daily, score_corpus, Library, SentimentSeries};

/// One of the fourteen run configurations: a feature layout plus, for the
/// sentiment layouts, the dictionary that fills the sentiment columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VariantSpec {
    pub variant: Variant,
    pub library: Option<Library>,
}

impl VariantSpec {
    /// Build a spec, enforcing that exactly the sentiment layouts carry a
    /// library.
    pub fn new(variant: Variant, library: Option<Library>) -> Result<VariantSpec> {
        match (variant.uses_sentiment(), library) {
            (true, Some(_)) | (false, None) => Ok(VariantSpec { variant, library }),
            (true, None) => Err(Error::UnknownVariant(format!(
                "{variant} needs a library suffix"
            ))),
            (false, Some(lib)) => Err(Error::UnknownVariant(format!(
                "{variant} takes no library, got {lib}"
            ))),
        }
    }

    /// All fourteen configurations: the two price-only layouts plus each
    /// sentiment layout under each of the three libraries.
    pub fn all() -> Vec<VariantSpec> {
        let mut specs = vec![
            VariantSpec { variant: Variant::OneFeature, library: None },
            VariantSpec { variant: Variant::FiveFeature, library: None },
        ];
        for variant in [
            Variant::FiveFeatureSentiHead,
            Variant::FiveFeatureSentiSyn,
            Variant::FiveFeatureSentiArt,
            Variant::FiveFeatureSentiHeadSyn,
        ] {
            for library in Library::ALL {
                specs.push(VariantSpec { variant, library: Some(library) });
            }
        }
        specs
    }

    /// Unique name, e.g. `five_feature_senti_head_vader`; doubles as the
    /// results file stem.
    pub fn name(&self) -> String {
        match self.library {
            Some(library) => format!("{}_{library}", self.variant),
            None => self.variant.to_string(),
        }
    }

    /// Human label for the sentiment sections this spec feeds the model,
    /// None for the price-only layouts.
    pub fn section_label(&self) -> Option<&'static str> {
        match self.variant {
            Variant::OneFeature | Variant::FiveFeature => None,
            Variant::FiveFeatureSentiHead => Some("heading"),
            Variant::FiveFeatureSentiSyn => Some("synopsis"),
            Variant::FiveFeatureSentiArt => Some("full_text"),
            Variant::FiveFeatureSentiHeadSyn => Some("heading_synopsis"),
        }
    }
}

impl std::fmt::Display for VariantSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.name())
    }
}

impl std::str::FromStr for VariantSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<VariantSpec> {
        VariantSpec::all()
            .into_iter()
            .find(|spec| spec.name() == s)
            .ok_or_else(|| Error::UnknownVariant(s.to_string()))
    }
}

/// Outcome of one trained configuration on one ticker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub ticker: String,
    pub variant: VariantSpec,
    /// Run-specific seed the model and shuffle were derived from.
    pub seed: u64,
    /// Holdout error, percent.
    pub mape: f64,
    /// Inverse-scaled holdout forecasts, one per holdout day.
    pub predictions: Vec<f64>,
    /// Raw closes the forecasts are judged against.
    pub actuals: Vec<f64>,
    pub wall_time_secs: f64,
}

impl RunResult {
    pub fn variant_name(&self) -> String {
        self.variant.name()
    }
}

/// A run that errored; the sweep records it and moves on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunFailure {
    pub ticker: String,
    pub variant_name: String,
    pub error: String,
}

/// Mean absolute percentage error, in percent: (100/n) Σ |A − F| / |A|.
/// Zero-length input or any zero actual is fatal (the formula divides by
/// each actual).
pub fn mape(actuals: &[f64], forecasts: &[f64]) -> Result<f64> {
    if actuals.is_empty() || actuals.len() != forecasts.len() {
        return Err(Error::LengthMismatch {
            actuals: actuals.len(),
            forecasts: forecasts.len(),
        });
    }
    let mut ratio_sum = 0.0;
    for (t, (&a, &f)) in actuals.iter().zip(forecasts).enumerate() {
        if a == 0.0 {
            return Err(Error::ZeroActual(t));
        }
        ratio_sum += (a - f).abs() / a.abs();
    }
    Ok((100.0 / actuals.len() as f64) * ratio_sum)
}

/// Everything the sweep needs for one ticker.
#[derive(Debug, Clone)]
pub struct TickerData {
    pub aliases: TickerAliases,
    pub prices: PriceSeries,
}

/// Sweep-wide settings; construct with [`SweepConfig::new`] and override
/// fields as needed.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub train: TrainConfig,
    pub lookback: usize,
    pub horizon: usize,
    pub holdout: usize,
    /// Articles published at or after this hour roll to the next day.
    pub cutoff_hour: Option<u32>,
    /// Base seed; each run derives its own from (ticker, variant, this).
    pub global_seed: u64,
    /// Directory holding one JSON file per completed run.
    pub results_dir: PathBuf,
    /// Reuse matching results already on disk instead of recomputing.
    pub resume: bool,
    /// Worker threads; None uses the default pool.
    pub jobs: Option<usize>,
    /// Configurations to run, default all fourteen.
    pub specs: Vec<VariantSpec>,
}

impl SweepConfig {
    pub fn new(results_dir: PathBuf, global_seed: u64) -> SweepConfig {
        SweepConfig {
            train: TrainConfig::default(),
            lookback: LOOKBACK,
            horizon: HORIZON,
            holdout: HOLDOUT,
            cutoff_hour: None,
            global_seed,
            results_dir,
            resume: false,
            jobs: None,
            specs: VariantSpec::all(),
        }
    }
}

/// Results plus recorded failures from one sweep invocation.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub results: Vec<RunResult>,
    pub failures: Vec<RunFailure>,
    /// How many results were reloaded from disk rather than computed.
    pub reused: usize,
}

/// Deterministic per-run seed: the first eight bytes of
/// sha256("ticker|variant|global_seed"). Runs are isolated — rerunning one
/// configuration never touches any other's randomness.
pub fn derive_seed(ticker: &str, variant_name: &str, global_seed: u64) -> u64 {
    let digest = Sha256::digest(format!("{ticker}|{variant_name}|{global_seed}").as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

/// Per-ticker precomputation shared by that ticker's fourteen runs.
struct TickerContext {
    data: TickerData,
    series: HashMap<(Section, Library), SentimentSeries>,
}

/// Run every (ticker × spec) combination, persisting each result as it
/// lands. Failures are recorded per run and never abort the sweep. With
/// `resume`, results already on disk whose (ticker, variant, seed) match
/// are reused, so an interrupted sweep continues where it stopped and ends
/// with the identical result set.
pub fn run_all(
    tickers: &[TickerData],
    articles: &[Article],
    lexicons: &LexiconSet,
    config: &SweepConfig,
) -> Result<SweepOutcome> {
    std::fs::create_dir_all(&config.results_dir)
        .map_err(|e| Error::write(&config.results_dir, e))?;

    // Section scores are ticker-independent; compute them once.
    let scores = score_corpus(articles, lexicons, &Section::ALL, &Library::ALL);

    let contexts: Vec<TickerContext> = tickers
        .iter()
        .map(|data| {
            let calendar = data.prices.calendar();
            let mut series = HashMap::new();
            for section in Section::ALL {
                for library in Library::ALL {
                    series.insert(
                        (section, library),
                        aggregate_daily(
                            &scores,
                            articles,
                            &data.aliases,
                            section,
                            library,
                            &calendar,
                            config.cutoff_hour,
                        ),
                    );
                }
            }
            TickerContext { data: data.clone(), series }
        })
        .collect();

    let jobs: Vec<(&TickerContext, VariantSpec)> = contexts
        .iter()
        .flat_map(|ctx| config.specs.iter().map(move |&spec| (ctx, spec)))
        .collect();

    let execute = || {
        jobs.par_iter()
            .map(|(ctx, spec)| execute_job(ctx, *spec, config))
            .collect::<Vec<_>>()
    };
    let outcomes = match config.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?
            .install(execute),
        None => execute(),
    };

    let mut results = Vec::new();
    let mut failures = Vec::new();
    let mut reused = 0;
    for outcome in outcomes {
        match outcome {
            JobOutcome::Computed(result) => results.push(result),
            JobOutcome::Reused(result) => {
                reused += 1;
                results.push(result);
            }
            JobOutcome::Failed(failure) => failures.push(failure),
        }
    }
    results.sort_by(|a, b| {
        (a.ticker.as_str(), a.variant_name()).cmp(&(b.ticker.as_str(), b.variant_name()))
    });
    failures.sort_by(|a, b| {
        (a.ticker.as_str(), a.variant_name.as_str())
            .cmp(&(b.ticker.as_str(), b.variant_name.as_str()))
    });
    Ok(SweepOutcome { results, failures, reused })
}

enum JobOutcome {
    Computed(RunResult),
    Reused(RunResult),
    Failed(RunFailure),
}

fn execute_job(ctx: &TickerContext, spec: VariantSpec, config: &SweepConfig) -> JobOutcome {
    let ticker = &ctx.data.aliases.ticker;
    let name = spec.name();
    let seed = derive_seed(ticker, &name, config.global_seed);

    if config.resume {
        let path = result_path(&config.results_dir, ticker, &name);
        if let Ok(existing) = load_result(&path) {
            if existing.ticker == *ticker
                && existing.variant == spec
                && existing.seed == seed
            {
                log::info!("{ticker}/{name}: reusing persisted result");
                return JobOutcome::Reused(existing);
            }
        }
    }

    match run_one(ctx, spec, seed, config) {
        Ok(result) => {
            if let Err(e) = save_result(&config.results_dir, &result) {
                return JobOutcome::Failed(RunFailure {
                    ticker: ticker.clone(),
                    variant_name: name,
                    error: e.to_string(),
                });
            }
            log::info!(
                "{ticker}/{name}: mape {:.4}% in {:.1}s",
                result.mape,
                result.wall_time_secs
            );
            JobOutcome::Computed(result)
        }
        Err(e) => {
            log::warn!("{ticker}/{name}: failed: {e}");
            JobOutcome::Failed(RunFailure {
                ticker: ticker.clone(),
                variant_name: name,
                error: e.to_string(),
            })
        }
    }
}

/// Train and evaluate one configuration on one ticker.
///
/// The holdout is walked in horizon-sized blocks: each block's forecasts
/// come from iterated one-step prediction anchored on the last fully
/// observed window, then the window re-anchors on observed data for the
/// next block. Forecasts are judged in price units against the raw closes.
fn run_one(
    ctx: &TickerContext,
    spec: VariantSpec,
    seed: u64,
    config: &SweepConfig,
) -> Result<RunResult> {
    let started = Instant::now();

    let mut sentiment = HashMap::new();
    if let Some(library) = spec.library {
        for &section in spec.variant.sections() {
            let series = ctx
                .series
                .get(&(section, library))
                .expect("context holds every section × library series");
            sentiment.insert(section, series.clone());
        }
    }

    let (predictions, actuals) =
        evaluate_one(&ctx.data.prices, &sentiment, spec.variant, seed, config)?;
    let mape = mape(&actuals, &predictions)?;
    Ok(RunResult {
        ticker: ctx.data.aliases.ticker.clone(),
        variant: spec,
        seed,
        mape,
        predictions,
        actuals,
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}

/// Train one model on explicit inputs and walk the holdout in
/// horizon-sized blocks, returning `(predictions, actuals)` in price
/// units.
///
/// This is the evaluation protocol behind every sweep result: scale on the
/// training span only, window, train, then forecast each holdout block
/// from the last fully observed window before it. The sweep supplies
/// corpus-derived sentiment series; tests can supply constructed ones.
pub fn evaluate_one(
    prices: &PriceSeries,
    sentiment: &HashMap<Section, SentimentSeries>,
    variant: Variant,
    seed: u64,
    config: &SweepConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let matrix = build_features(prices, sentiment, variant)?;
    let train_rows = matrix
        .rows()
        .checked_sub(config.holdout)
        .filter(|&n| n > 0)
        .ok_or(Error::InsufficientData {
            rows: matrix.rows(),
            needed: config.holdout + 1,
        })?;
    let scaler = fit_scaler(&matrix, train_rows);
    let scaled = apply_scaler(&matrix, &scaler)?;
    let data = window(&scaled, config.lookback, config.holdout)?;

    let mut model = init_model(matrix.feature_count(), seed);
    let train_config = TrainConfig { seed, ..config.train };
    let split = data.split;
    train(
        &mut model,
        data.inputs.slice(ndarray::s![..split, .., ..]),
        data.targets.slice(ndarray::s![..split]),
        &train_config,
    )?;

    let mut predictions = Vec::with_capacity(config.holdout);
    let mut actuals = Vec::with_capacity(config.holdout);
    let samples = data.samples();
    let mut block = split;
    while block < samples {
        let steps = config.horizon.min(samples - block);
        let forecast = predict_horizon(&model, data.input(block), &scaler, steps)?;
        for (k, value) in forecast.into_iter().enumerate() {
            let row = block + k + config.lookback;
            predictions.push(value);
            actuals.push(matrix.values[[row, 0]]);
        }
        block += steps;
    }
    debug_assert_eq!(predictions.len(), config.holdout);
    Ok((predictions, actuals))
}
