//! The three summary tables: per-ticker best variant, and winner tallies
//! by sentiment section and by library.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::RunResult;
use crate::error::{Error, Result};

/// Per-ticker winner: the configuration with the lowest holdout error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestVariantRow {
    pub ticker: String,
    pub variant_name: String,
    pub mape: f64,
}

/// One group's tally in the section or library table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinnersRow {
    pub label: String,
    /// Tickers whose best sentiment run falls in this group.
    pub winner_count: usize,
    /// Mean error of those winning runs; absent when the group never wins.
    pub winner_avg_mape: Option<f64>,
    /// Mean error over every run in the group, winners or not.
    pub group_avg_mape: f64,
}

/// `a` beats `b` on lower error; exact ties go to the lexicographically
/// smaller variant name so reports are reproducible.
fn beats(a: &RunResult, b: &RunResult) -> bool {
    a.mape < b.mape || (a.mape == b.mape && a.variant_name() < b.variant_name())
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// The lowest-error configuration per ticker, tickers in sorted order.
pub fn table_best_variant(results: &[RunResult]) -> Vec<BestVariantRow> {
    let mut best: BTreeMap<&str, &RunResult> = BTreeMap::new();
    for result in results {
        best.entry(result.ticker.as_str())
            .and_modify(|current| {
                if beats(result, current) {
                    *current = result;
                }
            })
            .or_insert(result);
    }
    best.into_values()
        .map(|r| BestVariantRow {
            ticker: r.ticker.clone(),
            variant_name: r.variant_name(),
            mape: r.mape,
        })
        .collect()
}

/// Shared engine for the two winner tables: groups sentiment runs by a
/// label, tallies which group each ticker's best sentiment run falls in,
/// and averages errors per group. Rows sort by winner count descending,
/// then label.
fn winners_by<F>(results: &[RunResult], label_of: F) -> Vec<WinnersRow>
where
    F: Fn(&RunResult) -> Option<String>,
{
    let labeled: Vec<(&RunResult, String)> = results
        .iter()
        .filter_map(|r| label_of(r).map(|l| (r, l)))
        .collect();

    let mut best_per_ticker: BTreeMap<&str, &RunResult> = BTreeMap::new();
    for (result, _) in &labeled {
        best_per_ticker
            .entry(result.ticker.as_str())
            .and_modify(|current| {
                if beats(result, current) {
                    *current = result;
                }
            })
            .or_insert(result);
    }

    let mut winner_mapes: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for best in best_per_ticker.values() {
        let label = label_of(best).expect("best run came from the labeled set");
        winner_mapes.entry(label).or_default().push(best.mape);
    }

    let mut group_mapes: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (result, label) in &labeled {
        group_mapes.entry(label.clone()).or_default().push(result.mape);
    }

    let mut rows: Vec<WinnersRow> = group_mapes
        .into_iter()
        .map(|(label, mapes)| {
            let winners = winner_mapes.get(&label);
            WinnersRow {
                winner_count: winners.map_or(0, Vec::len),
                winner_avg_mape: winners.map(|w| mean(w)),
                group_avg_mape: mean(&mapes),
                label,
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        b.winner_count
            .cmp(&a.winner_count)
            .then_with(|| a.label.cmp(&b.label))
    });
    rows
}

/// Winner tallies by the article section(s) feeding the model's sentiment
/// column(s). Price-only runs do not participate.
pub fn table_section_winners(results: &[RunResult]) -> Vec<WinnersRow> {
    winners_by(results, |r| r.variant.section_label().map(String::from))
}

/// Winner tallies by scoring library. Price-only runs do not participate.
pub fn table_library_winners(results: &[RunResult]) -> Vec<WinnersRow> {
    winners_by(results, |r| r.variant.library.map(|l| l.to_string()))
}

const WINNER_FOOTNOTE: &str = "Winner average is over each ticker's best run in the group; \
group average is over every run in the group.";

fn fmt_opt(value: Option<f64>) -> String {
    value.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"))
}

/// `ticker,best_variant,mape` rows.
pub fn write_best_variant_csv<W: Write>(rows: &[BestVariantRow], mut out: W) -> Result<()> {
    let write = |e| Error::Parse(format!("table export failed: {e}"));
    writeln!(out, "ticker,best_variant,mape").map_err(write)?;
    for row in rows {
        writeln!(out, "{},{},{:.4}", row.ticker, row.variant_name, row.mape).map_err(write)?;
    }
    Ok(())
}

fn write_winners_csv<W: Write>(rows: &[WinnersRow], label_header: &str, mut out: W) -> Result<()> {
    let write = |e| Error::Parse(format!("table export failed: {e}"));
    writeln!(
        out,
        "{label_header},winner_count,winner_avg_mape,group_avg_mape"
    )
    .map_err(write)?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{:.4}",
            row.label,
            row.winner_count,
            fmt_opt(row.winner_avg_mape),
            row.group_avg_mape
        )
        .map_err(write)?;
    }
    Ok(())
}

/// `section,...` winner-table CSV.
pub fn write_section_winners_csv<W: Write>(rows: &[WinnersRow], out: W) -> Result<()> {
    write_winners_csv(rows, "section", out)
}

/// `library,...` winner-table CSV.
pub fn write_library_winners_csv<W: Write>(rows: &[WinnersRow], out: W) -> Result<()> {
    write_winners_csv(rows, "library", out)
}

/// Render rows of pre-split cells as space-aligned columns.
fn render_aligned(headers: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<String>| -> String {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        padded.join("  ").trim_end().to_string()
    };
    let mut out = line(headers.iter().map(|h| h.to_string()).collect());
    out.push('\n');
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
    out.push('\n');
    for row in rows {
        out.push_str(&line(row));
        out.push('\n');
    }
    out
}

/// Plain-text best-variant table.
pub fn render_best_variant(rows: &[BestVariantRow]) -> String {
    render_aligned(
        &["ticker", "best variant", "mape (%)"],
        rows.iter()
            .map(|r| {
                vec![
                    r.ticker.clone(),
                    r.variant_name.clone(),
                    format!("{:.4}", r.mape),
                ]
            })
            .collect(),
    )
}

fn render_winners(rows: &[WinnersRow], label_header: &str) -> String {
    let mut text = render_aligned(
        &[label_header, "winners", "winner avg mape (%)", "group avg mape (%)"],
        rows.iter()
            .map(|r| {
                vec![
                    r.label.clone(),
                    r.winner_count.to_string(),
                    fmt_opt(r.winner_avg_mape),
                    format!("{:.4}", r.group_avg_mape),
                ]
            })
            .collect(),
    );
    text.push_str(WINNER_FOOTNOTE);
    text.push('\n');
    text
}

/// Plain-text section winner table.
pub fn render_section_winners(rows: &[WinnersRow]) -> String {
    render_winners(rows, "section")
}

/// Plain-text library winner table.
pub fn render_library_winners(rows: &[WinnersRow]) -> String {
    render_winners(rows, "library")
}
