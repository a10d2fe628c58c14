use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite input component at index {index}: {value}")]
    NonFiniteInput { index: usize, value: f64 },

    /// Malformed numeric field or document. `line` is 1-based; 0 when unknown.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("unknown activation `{0}`")]
    UnknownActivation(String),

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown variable `{name}` at line {line}")]
    UnknownVariable { name: String, line: usize },

    #[error("output index {index} out of range for vector of length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("input {dim} has an unbounded interval [{lower}, {upper}]")]
    UnboundedDomain { dim: usize, lower: f64, upper: f64 },

    #[error("need more than {k} samples to select {k} positives, got {len}")]
    InsufficientSamples { k: usize, len: usize },

    /// A reported counterexample failed independent re-evaluation.
    #[error("counterexample failed re-verification: {0}")]
    Verification(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
