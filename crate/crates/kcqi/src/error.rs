//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by simulation, training and I/O layers.
#[derive(Debug, Error)]
pub enum Error {
    /// Two inputs that must agree in length do not.
    #[error("length mismatch ({context}): {left} vs {right}")]
    LengthMismatch {
        context: &'static str,
        left: usize,
        right: usize,
    },

    /// A value or combination of values violates a precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Vector/matrix dimensions are inconsistent.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A configuration field failed validation.
    #[error("config error: {field}: {message}")]
    Config { field: &'static str, message: String },

    /// A data or model file has valid I/O but malformed content.
    #[error("data format error: {0}")]
    DataFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn config(field: &'static str, msg: impl Into<String>) -> Self {
        Error::Config {
            field,
            message: msg.into(),
        }
    }

    /// True when the error is an I/O failure rather than a validation problem.
    /// The CLI maps validation errors to exit code 1 and I/O errors to 2.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io(_) => true,
            Error::Csv(e) => e.is_io_error(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
