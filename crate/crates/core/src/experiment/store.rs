//! Crash-tolerant result persistence: one JSON document per run, written
//! atomically so a killed sweep never leaves a half-written file behind.

use std::path::{Path, PathBuf};

use super::RunResult;
use crate::error::{Error, Result};

/// Where one run's result lives: `<dir>/<ticker>/<variant>.json`.
pub fn result_path(dir: &Path, ticker: &str, variant_name: &str) -> PathBuf {
    dir.join(ticker).join(format!("{variant_name}.json"))
}

/// Persist a result via write-to-temp-then-rename, so concurrent readers
/// and crashes only ever observe complete documents.
pub fn save_result(dir: &Path, result: &RunResult) -> Result<()> {
    let path = result_path(dir, &result.ticker, &result.variant_name());
    let parent = path.parent().expect("result path has a parent");
    std::fs::create_dir_all(parent).map_err(|e| Error::write(parent, e))?;
    let blob = serde_json::to_string_pretty(result)?;
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, blob).map_err(|e| Error::write(&tmp, e))?;
    std::fs::rename(&tmp, &path).map_err(|e| Error::write(&path, e))?;
    Ok(())
}

/// Load one persisted result.
pub fn load_result(path: &Path) -> Result<RunResult> {
    let blob = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&blob)?)
}

/// Load every result under `dir` (one subdirectory per ticker), sorted by
/// (ticker, variant). Stray files that are not result documents are
/// reported back as warnings, not errors, so a partially written store is
/// still readable.
pub fn load_all(dir: &Path) -> Result<(Vec<RunResult>, Vec<String>)> {
    let mut results = Vec::new();
    let mut warnings = Vec::new();
    let tickers = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for ticker_entry in tickers {
        let ticker_dir = ticker_entry.map_err(|e| Error::io(dir, e))?.path();
        if !ticker_dir.is_dir() {
            continue;
        }
        let files = std::fs::read_dir(&ticker_dir).map_err(|e| Error::io(&ticker_dir, e))?;
        for file_entry in files {
            let path = file_entry.map_err(|e| Error::io(&ticker_dir, e))?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            match load_result(&path) {
                Ok(result) => results.push(result),
                Err(e) => warnings.push(format!("skipping {}: {e}", path.display())),
            }
        }
    }
    results.sort_by(|a, b| {
        (a.ticker.as_str(), a.variant_name()).cmp(&(b.ticker.as_str(), b.variant_name()))
    });
    Ok((results, warnings))
}
