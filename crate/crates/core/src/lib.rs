//! News-sentiment stock forecasting pipeline.
//!
//! The crate turns raw financial news dumps and daily OHLCV prices into a
//! comparison of LSTM forecast variants:
//!
//! 1. [`corpus`] ingests, cleans and deduplicates articles and matches them
//!    to tickers by symbol or company name.
//! 2. [`lexicon`] loads the three sentiment dictionaries (a valence map plus
//!    two positive/negative word lists).
//! 3. [`sentiment`] scores article sections with each dictionary and
//!    aggregates scores into per-ticker business-day series.
//! 4. [`dataset`] joins prices with sentiment columns, min-max scales on the
//!    training region only, and windows rows into supervised samples.
//! 5. [`lstm`] is a from-scratch stacked LSTM regressor (sigmoid gates, relu
//!    cell activation) trained with Adam over exact BPTT gradients.
//! 6. [`experiment`] runs the 14 feature-set x dictionary variants per
//!    ticker, scores holdout forecasts with MAPE, and emits summary tables.
//!
//! The `senticast` binary drives the whole pipeline from a TOML config; see
//! [`config`] for the file format.

pub mod calendar;
pub mod config;
pub mod corpus;
pub mod dataset;
mod error;
pub mod experiment;
pub mod lexicon;
pub mod lstm;
pub mod sentiment;

pub use error::{Error, Result};
