use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("degenerate state: {0}")]
    Degenerate(String),

    #[error("parameter count mismatch: architecture has {expected} layers, got {found} angles")]
    ParamCount { expected: usize, found: usize },

    #[error("non-finite {what} at iteration {iteration} (theta = {theta:?})")]
    NonFinite {
        what: &'static str,
        iteration: u64,
        theta: Vec<f64>,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("{path}: bad magic, expected {expected:?}, found {found:?}")]
    BadMagic {
        path: PathBuf,
        expected: [u8; 4],
        found: Vec<u8>,
    },

    #[error("{path}: unsupported format version {found} (supported: {supported})")]
    UnsupportedVersion {
        path: PathBuf,
        found: u32,
        supported: u32,
    },

    #[error("{path}: truncated or oversized file, expected {expected} bytes, found {found}")]
    Length {
        path: PathBuf,
        expected: u64,
        found: u64,
    },

    #[error("{path}: record {record} violates conservation ({quantity} residual {residual:e})")]
    Conservation {
        path: PathBuf,
        record: u64,
        quantity: &'static str,
        residual: f64,
    },

    #[error("{path}:{line}: {message}")]
    Config {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error on {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
