use thiserror::Error;

/// Errors surfaced by the library. Size caps are reported with the cap that
/// was in force so callers can decide whether to retry with an override.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{what}: requested size {requested} exceeds cap {cap}")]
    SizeLimit {
        what: &'static str,
        requested: u128,
        cap: u128,
    },

    #[error("row index {index} out of range for side {n}")]
    RowIndexOutOfRange { index: usize, n: usize },

    #[error("column index {index} out of range for side {n}")]
    ColumnIndexOutOfRange { index: usize, n: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("side {n} must be even for this operation ({hint})")]
    RequiresEvenSide { n: usize, hint: &'static str },

    #[error("side {n} must be odd for this operation")]
    RequiresOddSide { n: usize },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("not a metric: {0}")]
    InvalidMetric(String),

    #[error("squared-distance Gram matrix not positive semidefinite: min eigenvalue {min_eigenvalue}, threshold {threshold}")]
    NotPositiveSemidefinite {
        min_eigenvalue: f64,
        threshold: f64,
    },

    #[error("zero denominator: {0}")]
    ZeroDenominator(&'static str),

    #[error("linear program error: {0}")]
    Lp(String),

    #[error("malformed table stream: {0}")]
    TableFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid_param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
