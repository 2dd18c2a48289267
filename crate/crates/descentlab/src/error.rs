//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller violated an API precondition (bad dimension, bad hyperparameter, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An input value is outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A computation produced a non-finite value.
    #[error("non-finite value at coordinate {index} ({context})")]
    NonFinite {
        /// What was being computed when the value went non-finite.
        context: String,
        /// Offending coordinate.
        index: usize,
    },

    /// An entire evolution generation became unusable (e.g. every model diverged).
    #[error("generation {generation} unrecoverable: {message}")]
    Generation { generation: usize, message: String },

    /// A CSV document failed to parse.
    #[error("csv parse error at line {line}: {message}")]
    CsvParse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn non_finite(context: impl Into<String>, index: usize) -> Self {
        Error::NonFinite {
            context: context.into(),
            index,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
