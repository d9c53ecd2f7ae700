use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type. Per-record problems (a bad line in a lexicon, a
/// malformed article) are reported as warnings by the loaders instead; only
/// conditions that make the requested operation impossible end up here.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Parse(String),

    #[error("empty lexicon: {0}")]
    EmptyLexicon(String),

    #[error("insufficient data: {rows} usable rows, need at least {needed}")]
    InsufficientData { rows: usize, needed: usize },

    #[error("unknown variant `{0}`")]
    UnknownVariant(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite loss at epoch {epoch}: {value}; try a smaller learning rate")]
    NonFiniteLoss { epoch: usize, value: f64 },

    #[error("MAPE undefined: actual value at index {0} is zero")]
    ZeroActual(usize),

    #[error("length mismatch: {actuals} actuals vs {forecasts} forecasts")]
    LengthMismatch { actuals: usize, forecasts: usize },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Wrap a read failure with the path it happened on.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Wrap a write failure with the path it happened on.
    pub fn write(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Write { path: path.into(), source }
    }
}
