use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("degenerate interval: end {end} must be strictly greater than start {start}")]
    DegenerateInterval { start: f64, end: f64 },

    #[error("point {x} lies outside [{start}, {end}]")]
    OutOfDomain { x: f64, start: f64, end: f64 },

    #[error("unsupported multiplicity {0}: expected 1..5")]
    UnsupportedMultiplicity(usize),

    #[error("noise index {index} exceeds component count m = {m}")]
    NoiseIndexOutOfRange { index: usize, m: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("budget exceeded: {what} requires {required}, limit is {limit}")]
    Budget {
        what: &'static str,
        required: u128,
        limit: u128,
    },

    #[error("coefficient evaluation failed on the {path} path: {reason}")]
    Coefficient { path: &'static str, reason: String },

    #[error("corrupt tensor header in {path}: {reason}")]
    CorruptHeader { path: PathBuf, reason: String },

    #[error("unknown tensor schema version {0}")]
    UnknownSchema(u32),

    #[error("tensor payload size mismatch: expected {expected} bytes, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
