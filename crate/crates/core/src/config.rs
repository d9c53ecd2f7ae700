//! Declarative pipeline configuration.
//!
//! One TOML file names every input (article dump, dictionary files, price
//! CSVs, alias table), the date range, the model geometry and the training
//! hyperparameters. Relative paths resolve against the config file's own
//! directory, so a config travels with its data. Validation runs before
//! any long computation and reports every problem at once rather than
//! failing on the first.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::dataset::{HOLDOUT, HORIZON, LOOKBACK};
use crate::error::{Error, Result};
use crate::lstm::TrainConfig;

/// A ready-to-fill example config, also used by the test suite.
pub const SAMPLE: &str = r#"# Pipeline configuration. Relative paths resolve
# against this file's directory.

[paths]
articles = "data/articles.jsonl"
vader_lexicon = "data/vader_valence.tsv"
hiv4_positive = "data/hiv4_positive.txt"
hiv4_negative = "data/hiv4_negative.txt"
lm_positive = "data/lm_positive.txt"
lm_negative = "data/lm_negative.txt"
prices_dir = "data/prices"
aliases = "data/aliases.csv"
results_dir = "results"

[calendar]
start = "2019-01-01"
end = "2022-08-31"
# Articles published at or after this hour count toward the next day.
# Omit to keep every article on its publication date.
# cutoff_hour = 16

[model]
lookback = 10
horizon = 5
holdout = 30

[train]
epochs = 100
batch_size = 5
learning_rate = 0.001

[run]
seed = 42
tickers = ["INFY", "TCS"]
"#;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PathsSection {
    pub articles: PathBuf,
    pub vader_lexicon: PathBuf,
    pub hiv4_positive: PathBuf,
    pub hiv4_negative: PathBuf,
    pub lm_positive: PathBuf,
    pub lm_negative: PathBuf,
    /// Directory holding one `<TICKER>.csv` OHLCV file per ticker.
    pub prices_dir: PathBuf,
    pub aliases: PathBuf,
    pub results_dir: PathBuf,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CalendarSection {
    /// First date considered, `YYYY-MM-DD` (quoted).
    pub start: NaiveDate,
    /// Last date considered, inclusive.
    pub end: NaiveDate,
    /// Hour (0-23) after which an article rolls to the next day.
    #[serde(default)]
    pub cutoff_hour: Option<u32>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub lookback: usize,
    pub horizon: usize,
    pub holdout: usize,
}

impl Default for ModelSection {
    fn default() -> ModelSection {
        ModelSection { lookback: LOOKBACK, horizon: HORIZON, holdout: HOLDOUT }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
}

impl Default for TrainSection {
    fn default() -> TrainSection {
        let defaults = TrainConfig::default();
        TrainSection {
            epochs: defaults.epochs,
            batch_size: defaults.batch_size,
            learning_rate: defaults.learning_rate,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default)]
    pub seed: u64,
    pub tickers: Vec<String>,
}

/// Everything the binary needs, parsed and path-resolved.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: PathsSection,
    pub calendar: CalendarSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub train: TrainSection,
    pub run: RunSection,
}

impl PipelineConfig {
    /// Parse a config file and resolve its relative paths against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<PipelineConfig> {
        let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: PipelineConfig = toml::from_str(&raw)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        config.resolve_paths(base);
        Ok(config)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let paths = &mut self.paths;
        for p in [
            &mut paths.articles,
            &mut paths.vader_lexicon,
            &mut paths.hiv4_positive,
            &mut paths.hiv4_negative,
            &mut paths.lm_positive,
            &mut paths.lm_negative,
            &mut paths.prices_dir,
            &mut paths.aliases,
            &mut paths.results_dir,
        ] {
            resolve(p);
        }
    }

    /// Price CSV for one ticker.
    pub fn price_path(&self, ticker: &str) -> PathBuf {
        self.paths.prices_dir.join(format!("{ticker}.csv"))
    }

    /// Fewest usable price rows a ticker needs.
    pub fn min_price_rows(&self) -> usize {
        self.model.lookback + self.model.horizon + self.model.holdout
    }

    /// Training hyperparameters with a concrete seed filled in.
    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.train.epochs,
            batch_size: self.train.batch_size,
            learning_rate: self.train.learning_rate,
            seed,
        }
    }

    /// Check every invariant, reporting all violations together.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();

        let mut need_file = |label: &str, path: &Path| {
            if !path.is_file() {
                problems.push(format!("{label} not found: {}", path.display()));
            }
        };
        need_file("articles file", &self.paths.articles);
        need_file("valence lexicon", &self.paths.vader_lexicon);
        need_file("hiv4 positive list", &self.paths.hiv4_positive);
        need_file("hiv4 negative list", &self.paths.hiv4_negative);
        need_file("lm positive list", &self.paths.lm_positive);
        need_file("lm negative list", &self.paths.lm_negative);
        need_file("alias file", &self.paths.aliases);
        if !self.paths.prices_dir.is_dir() {
            problems.push(format!(
                "prices directory not found: {}",
                self.paths.prices_dir.display()
            ));
        } else {
            for ticker in &self.run.tickers {
                let path = self.price_path(ticker);
                if !path.is_file() {
                    problems.push(format!("price file for {ticker} not found: {}", path.display()));
                }
            }
        }

        if self.calendar.start >= self.calendar.end {
            problems.push(format!(
                "calendar start {} is not before end {}",
                self.calendar.start, self.calendar.end
            ));
        }
        if let Some(hour) = self.calendar.cutoff_hour {
            if hour > 23 {
                problems.push(format!("cutoff_hour {hour} is not an hour of the day"));
            }
        }

        for (label, value) in [
            ("lookback", self.model.lookback),
            ("horizon", self.model.horizon),
            ("holdout", self.model.holdout),
            ("epochs", self.train.epochs),
            ("batch_size", self.train.batch_size),
        ] {
            if value == 0 {
                problems.push(format!("{label} must be positive"));
            }
        }
        if !(self.train.learning_rate.is_finite() && self.train.learning_rate > 0.0) {
            problems.push("learning_rate must be positive".to_string());
        }

        if self.run.tickers.is_empty() {
            problems.push("ticker list is empty".to_string());
        }
        let mut seen = std::collections::HashSet::new();
        for ticker in &self.run.tickers {
            if !seen.insert(ticker.as_str()) {
                problems.push(format!("ticker {ticker} listed twice"));
            }
        }

        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }
}
