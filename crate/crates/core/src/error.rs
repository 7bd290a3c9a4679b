//! Crate-wide error type.

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent input data, pinned to a file and row.
    #[error("{path}:{row}: {message}")]
    Data {
        path: PathBuf,
        row: u64,
        message: String,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    Shape {
        context: &'static str,
        expected: String,
        actual: String,
    },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("non-finite loss at epoch {epoch}: {details}")]
    NanLoss { epoch: usize, details: String },

    #[error("non-finite gradient in parameter {param}")]
    NanGradient { param: usize },

    #[error("empty supervised mask")]
    EmptyMask,

    #[error("metric requires both classes, got a single class")]
    SingleClass,

    #[error("no positive labels in scored set")]
    NoPositives,

    #[error("top-k threshold flags zero nodes (k = {k_percent}%, n = {n})")]
    EmptyTopK { k_percent: f64, n: usize },

    #[error("all {0} trials failed")]
    AllTrialsFailed(usize),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub fn data(path: impl Into<PathBuf>, row: u64, message: impl Into<String>) -> Self {
        Error::Data {
            path: path.into(),
            row,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
