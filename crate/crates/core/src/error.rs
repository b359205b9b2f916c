use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("invalid value for `{field}`: {reason}")]
    InvalidField { field: String, reason: String },

    #[error("unknown component `{0}`")]
    UnknownComponent(String),

    #[error("missing required field `{0}`")]
    MissingField(String),

    #[error("unsupported schema version {found} (expected {expected})")]
    SchemaVersion { found: u64, expected: u64 },

    #[error("non-finite input to {0}")]
    NonFinite(&'static str),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid variant: {0}")]
    Variant(String),

    #[error("invalid precision: {0}")]
    Precision(String),

    #[error("unusable modulator: extinction ratio must be > 0 dB")]
    ZeroExtinction,

    #[error("no positive photocurrent root")]
    NoPositiveRoot,

    #[error("unsupported kernel size {0} (only 1 and 3 map onto the core)")]
    UnsupportedKernel(u32),

    #[error("invalid layer `{name}`: {reason}")]
    Layer { name: String, reason: String },

    #[error("workload is empty")]
    EmptyWorkload,

    #[error("clock frequency must be positive and finite, got {0}")]
    Frequency(f64),

    #[error("clock {requested:.4e} Hz exceeds modulator max rate {max:.4e} Hz (pass --allow-overclock)")]
    Overclock { requested: f64, max: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("refresh-rate violation on cell {cell}: reprogrammed after {interval_ns} ns, minimum cycle is {cycle_ns} ns")]
    RefreshViolation {
        cell: usize,
        interval_ns: f64,
        cycle_ns: f64,
    },

    #[error("design point {index} failed: {source}")]
    Point {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub(crate) fn field(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidField {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
