//! Price loading, feature assembly, min-max scaling and sliding-window
//! construction of supervised samples.
//!
//! The pipeline here is deliberately mechanical: validated OHLCV rows and
//! daily sentiment values are joined on the trading calendar into a dense
//! matrix (close always first), scaled with train-only column ranges, then
//! cut into lookback windows whose target is the next day's scaled close.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::Path;

use chrono::NaiveDate;
use ndarray::{Array1, Array2, Array3, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::calendar::BusinessCalendar;
use crate::corpus::Section;
use crate::error::{Error, Result};
use crate::sentiment::SentimentSeries;

/// Days of history in each input window.
pub const LOOKBACK: usize = 10;
/// Days ahead the evaluation forecasts by iterating one-step predictions.
pub const HORIZON: usize = 5;
/// Trailing samples reserved for testing.
pub const HOLDOUT: usize = 30;

/// One validated OHLCV bar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceRow {
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: f64,
}

impl PriceRow {
    /// Positive prices, non-negative volume, and low ≤ open/close ≤ high.
    fn is_valid(&self) -> bool {
        let finite = [self.open, self.high, self.low, self.close, self.volume]
            .iter()
            .all(|v| v.is_finite());
        finite
            && self.open > 0.0
            && self.high > 0.0
            && self.low > 0.0
            && self.close > 0.0
            && self.volume >= 0.0
            && self.low <= self.open.min(self.close)
            && self.open.max(self.close) <= self.high
    }
}

/// Date-sorted OHLCV history for one ticker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    pub ticker: String,
    pub rows: Vec<PriceRow>,
}

impl PriceSeries {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// The trading calendar implied by this series.
    pub fn calendar(&self) -> BusinessCalendar {
        BusinessCalendar::from_dates(self.rows.iter().map(|r| r.date))
    }
}

/// Load a `date,open,high,low,close,volume` CSV into a validated series.
///
/// Rows that fail validation (bad numbers, OHLC ordering, duplicate dates —
/// first occurrence wins) are rejected with warnings. Fewer than `min_rows`
/// surviving rows is fatal: the windowed dataset downstream would be empty.
pub fn load_prices(
    path: &Path,
    ticker: &str,
    min_rows: usize,
) -> Result<(PriceSeries, Vec<String>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (Some(c_date), Some(c_open), Some(c_high), Some(c_low), Some(c_close), Some(c_volume)) = (
        col("date"),
        col("open"),
        col("high"),
        col("low"),
        col("close"),
        col("volume"),
    ) else {
        return Err(Error::Parse(format!(
            "{}: expected columns date, open, high, low, close, volume",
            path.display()
        )));
    };

    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line_no = idx + 2;
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                warnings.push(format!("line {line_no}: {e}"));
                continue;
            }
        };
        let date = record
            .get(c_date)
            .and_then(|s| s.parse::<NaiveDate>().ok());
        let num = |i: usize| record.get(i).and_then(|s| s.parse::<f64>().ok());
        let (Some(date), Some(open), Some(high), Some(low), Some(close), Some(volume)) = (
            date,
            num(c_open),
            num(c_high),
            num(c_low),
            num(c_close),
            num(c_volume),
        ) else {
            warnings.push(format!("line {line_no}: unparseable row, rejected"));
            continue;
        };
        let row = PriceRow { date, open, high, low, close, volume };
        if !row.is_valid() {
            warnings.push(format!(
                "line {line_no}: {date} violates price ordering, rejected"
            ));
            continue;
        }
        rows.push(row);
    }

    rows.sort_by_key(|r| r.date);
    let mut seen_dates = std::collections::HashSet::new();
    let mut deduped = Vec::with_capacity(rows.len());
    for row in rows {
        if seen_dates.insert(row.date) {
            deduped.push(row);
        } else {
            warnings.push(format!("duplicate date {}, first row kept", row.date));
        }
    }

    if deduped.len() < min_rows {
        return Err(Error::InsufficientData { rows: deduped.len(), needed: min_rows });
    }
    Ok((PriceSeries { ticker: ticker.to_string(), rows: deduped }, warnings))
}

/// The six feature layouts a model can be trained on. Sentiment layouts are
/// parameterized by library at the experiment level; the layout only fixes
/// which article sections contribute columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    OneFeature,
    FiveFeature,
    FiveFeatureSentiHead,
    FiveFeatureSentiSyn,
    FiveFeatureSentiArt,
    FiveFeatureSentiHeadSyn,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::OneFeature,
        Variant::FiveFeature,
        Variant::FiveFeatureSentiHead,
        Variant::FiveFeatureSentiSyn,
        Variant::FiveFeatureSentiArt,
        Variant::FiveFeatureSentiHeadSyn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::OneFeature => "one_feature",
            Variant::FiveFeature => "five_feature",
            Variant::FiveFeatureSentiHead => "five_feature_senti_head",
            Variant::FiveFeatureSentiSyn => "five_feature_senti_syn",
            Variant::FiveFeatureSentiArt => "five_feature_senti_art",
            Variant::FiveFeatureSentiHeadSyn => "five_feature_senti_head_syn",
        }
    }

    /// Article sections contributing a sentiment column, in column order.
    pub fn sections(self) -> &'static [Section] {
        match self {
            Variant::OneFeature | Variant::FiveFeature => &[],
            Variant::FiveFeatureSentiHead => &[Section::Heading],
            Variant::FiveFeatureSentiSyn => &[Section::Synopsis],
            Variant::FiveFeatureSentiArt => &[Section::FullText],
            Variant::FiveFeatureSentiHeadSyn => &[Section::Heading, Section::Synopsis],
        }
    }

    /// True for the layouts that carry at least one sentiment column.
    pub fn uses_sentiment(self) -> bool {
        !self.sections().is_empty()
    }

    pub fn feature_count(self) -> usize {
        match self {
            Variant::OneFeature => 1,
            Variant::FiveFeature => 5,
            _ => 5 + self.sections().len(),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Variant> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::UnknownVariant(s.to_string()))
    }
}

/// Dense dates × columns matrix, close always in column 0.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub ticker: String,
    pub dates: Vec<NaiveDate>,
    pub columns: Vec<String>,
    pub values: Array2<f64>,
}

impl FeatureMatrix {
    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn feature_count(&self) -> usize {
        self.values.ncols()
    }

    /// Index of the close column (always 0 by construction).
    pub const CLOSE: usize = 0;

    /// Debug dump: header row of column names, then one row per date.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let write = |e| Error::Parse(format!("feature export failed: {e}"));
        writeln!(out, "date,{}", self.columns.join(",")).map_err(write)?;
        for (date, row) in self.dates.iter().zip(self.values.rows()) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.6}")).collect();
            writeln!(out, "{date},{}", cells.join(",")).map_err(write)?;
        }
        Ok(())
    }
}

/// Join prices with the sentiment series a variant needs.
///
/// Column order is close, then open/high/low/volume for the five-feature
/// layouts, then one sentiment column per section in the variant's order.
/// Sentiment cells read 0 on days the series does not cover.
pub fn build_features(
    prices: &PriceSeries,
    sentiment: &HashMap<Section, SentimentSeries>,
    variant: Variant,
) -> Result<FeatureMatrix> {
    for section in variant.sections() {
        let series = sentiment.get(section).ok_or_else(|| {
            Error::Shape(format!(
                "variant {variant} needs a {section} sentiment series"
            ))
        })?;
        if series.ticker != prices.ticker {
            return Err(Error::Shape(format!(
                "sentiment series is for {}, prices for {}",
                series.ticker, prices.ticker
            )));
        }
    }

    let mut columns = vec!["close".to_string()];
    if variant != Variant::OneFeature {
        for name in ["open", "high", "low", "volume"] {
            columns.push(name.to_string());
        }
    }
    for section in variant.sections() {
        columns.push(format!("senti_{section}"));
    }

    let rows = prices.rows.len();
    let mut values = Array2::zeros((rows, columns.len()));
    for (i, row) in prices.rows.iter().enumerate() {
        values[[i, 0]] = row.close;
        let mut j = 1;
        if variant != Variant::OneFeature {
            values[[i, 1]] = row.open;
            values[[i, 2]] = row.high;
            values[[i, 3]] = row.low;
            values[[i, 4]] = row.volume;
            j = 5;
        }
        for section in variant.sections() {
            values[[i, j]] = sentiment[section].value_on(row.date);
            j += 1;
        }
    }

    Ok(FeatureMatrix {
        ticker: prices.ticker.clone(),
        dates: prices.rows.iter().map(|r| r.date).collect(),
        columns,
        values,
    })
}

/// Per-column range observed on the training rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnRange {
    pub min: f64,
    pub max: f64,
}

impl ColumnRange {
    /// Map x into [0, 1] over the fitted range; constant columns map to 0.
    /// Values outside the range deliberately leave [0, 1] unclamped.
    pub fn scale(&self, x: f64) -> f64 {
        if self.max > self.min {
            (x - self.min) / (self.max - self.min)
        } else {
            0.0
        }
    }

    /// Inverse of [`ColumnRange::scale`]; constant columns restore their
    /// single observed value.
    pub fn unscale(&self, y: f64) -> f64 {
        if self.max > self.min {
            y * (self.max - self.min) + self.min
        } else {
            self.min
        }
    }
}

/// Min-max ranges fitted on the leading training rows only, keyed by column
/// name so params saved from one layout cannot be misapplied to another.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScalerParams {
    columns: BTreeMap<String, ColumnRange>,
}

impl ScalerParams {
    pub fn range(&self, column: &str) -> Option<ColumnRange> {
        self.columns.get(column).copied()
    }

    /// Recover a raw close price from its scaled value.
    pub fn invert_close(&self, scaled: f64) -> Result<f64> {
        self.columns
            .get("close")
            .map(|r| r.unscale(scaled))
            .ok_or_else(|| Error::Shape("scaler has no close column".to_string()))
    }

    /// Scale a raw close price; the inverse of [`ScalerParams::invert_close`].
    pub fn scale_close(&self, raw: f64) -> Result<f64> {
        self.columns
            .get("close")
            .map(|r| r.scale(raw))
            .ok_or_else(|| Error::Shape("scaler has no close column".to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(json: &str) -> Result<ScalerParams> {
        Ok(serde_json::from_str(json)?)
    }
}

/// Fit per-column ranges on the first `train_rows` rows only, so nothing
/// about the test region can leak into the transform.
pub fn fit_scaler(matrix: &FeatureMatrix, train_rows: usize) -> ScalerParams {
    assert!(
        train_rows > 0 && train_rows <= matrix.rows(),
        "train_rows must select a non-empty row prefix"
    );
    let mut columns = BTreeMap::new();
    for (j, name) in matrix.columns.iter().enumerate() {
        let column = matrix.values.slice(ndarray::s![..train_rows, j]);
        let min = column.iter().copied().fold(f64::INFINITY, f64::min);
        let max = column.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        columns.insert(name.clone(), ColumnRange { min, max });
    }
    ScalerParams { columns }
}

/// Apply fitted ranges to every cell. Errors if the params lack one of the
/// matrix's columns (fitted on a different layout).
pub fn apply_scaler(matrix: &FeatureMatrix, params: &ScalerParams) -> Result<FeatureMatrix> {
    let mut ranges = Vec::with_capacity(matrix.columns.len());
    for name in &matrix.columns {
        let range = params.range(name).ok_or_else(|| {
            Error::Shape(format!("scaler has no range for column {name}"))
        })?;
        ranges.push(range);
    }
    let mut values = matrix.values.clone();
    for (mut column, range) in values.columns_mut().into_iter().zip(&ranges) {
        column.mapv_inplace(|x| range.scale(x));
    }
    Ok(FeatureMatrix { values, ..matrix.clone() })
}

/// Supervised samples: each input spans `lookback` consecutive rows and its
/// target is the close of the row immediately after.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedDataset {
    /// samples × lookback × features.
    pub inputs: Array3<f64>,
    /// Scaled next-day close per sample.
    pub targets: Array1<f64>,
    /// Samples before this index train; the rest test.
    pub split: usize,
}

impl WindowedDataset {
    pub fn samples(&self) -> usize {
        self.inputs.len_of(Axis(0))
    }

    pub fn lookback(&self) -> usize {
        self.inputs.len_of(Axis(1))
    }

    pub fn feature_count(&self) -> usize {
        self.inputs.len_of(Axis(2))
    }

    pub fn train_count(&self) -> usize {
        self.split
    }

    pub fn test_count(&self) -> usize {
        self.samples() - self.split
    }

    /// Input window for one sample as a lookback × features view.
    pub fn input(&self, sample: usize) -> ArrayView2<'_, f64> {
        self.inputs.index_axis(Axis(0), sample)
    }
}

/// Cut a (scaled) matrix into stride-1 sliding windows, reserving the last
/// `holdout` samples for testing.
pub fn window(matrix: &FeatureMatrix, lookback: usize, holdout: usize) -> Result<WindowedDataset> {
    let rows = matrix.rows();
    if rows <= lookback + holdout {
        return Err(Error::InsufficientData { rows, needed: lookback + holdout + 1 });
    }
    let samples = rows - lookback;
    let features = matrix.feature_count();
    let mut inputs = Array3::zeros((samples, lookback, features));
    let mut targets = Array1::zeros(samples);
    for i in 0..samples {
        inputs
            .index_axis_mut(Axis(0), i)
            .assign(&matrix.values.slice(ndarray::s![i..i + lookback, ..]));
        targets[i] = matrix.values[[i + lookback, FeatureMatrix::CLOSE]];
    }
    Ok(WindowedDataset { inputs, targets, split: samples - holdout })
}
