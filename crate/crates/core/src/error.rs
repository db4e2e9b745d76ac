use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the re-ranking engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("invalid feature set: {0}")]
    InvalidFeatures(String),

    #[error("non-finite value at index {0}")]
    NonFiniteValue(usize),

    #[error("gallery is empty")]
    EmptyGallery,

    #[error("candidate pool is empty (k = {k})")]
    KTooLarge { k: usize },

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("sigma table does not match the reference data (digest mismatch)")]
    StaleSigmaTable,

    #[error("sigma must be positive, got {0}")]
    NonPositiveSigma(f64),

    #[error("no ground truth for probe {0}")]
    MissingTruth(u64),

    #[error("format error in {path}: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
