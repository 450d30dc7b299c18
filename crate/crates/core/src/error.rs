use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("half-width must be finite and non-negative, got {0}")]
    InvalidHalfWidth(f64),

    #[error("Lp exponent must be finite and >= 1, got {0}")]
    InvalidExponent(f64),

    #[error("search radius must be finite and > 0, got {0}")]
    InvalidRadius(f64),

    #[error("k must be at least 1")]
    InvalidK,

    #[error("leaf size must be at least 1")]
    InvalidLeafSize,

    #[error("dimension must be 2 or 3, got {0}")]
    InvalidDimension(usize),

    #[error("{op} is not defined for metric {metric}")]
    UnsupportedMetric { op: &'static str, metric: String },

    #[error("unknown metric {0:?} (expected lp:<p>, linf, cosine, angular, euclid2d or hamming3)")]
    UnknownMetric(String),

    #[error("unknown dataset format {0:?} (expected csv-xyz, bin-f32x4, csv-2d or bits)")]
    UnknownFormat(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("zero vector has no direction ({set} index {index})")]
    ZeroVector { set: &'static str, index: usize },

    #[error("invalid bit string {0:?}: expected up to 3 characters of 0/1")]
    InvalidBits(String),

    #[error("transform {transform} cannot be applied to a {input} point")]
    TransformMismatch {
        transform: &'static str,
        input: &'static str,
    },

    #[error("record {record}: {message}")]
    Parse { record: usize, message: String },

    #[error("need {needed} records but only {available} available")]
    InsufficientRecords { needed: usize, available: usize },

    #[error("sweep values must be strictly increasing")]
    NonIncreasingSweep,

    #[error("ground truth row is empty")]
    EmptyTruth,

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the error reflects bad user input rather than a broken internal invariant.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Invariant(_))
    }
}
