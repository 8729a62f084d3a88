//! Shared error type for the crate.

use thiserror::Error;

/// Errors produced by parsing, validation, and numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A cell could not be parsed (line numbers are 1-based, header included).
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Input had no data rows.
    #[error("empty input: {0}")]
    EmptyData(String),

    /// A value is outside its domain (non-positive index, rating out of range,
    /// hyper-parameter <= 0, simplex violation, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Array dimensions do not match the declared item/rater/category counts.
    #[error("shape error: {0}")]
    Shape(String),

    /// The requested operation is not defined for this input
    /// (e.g. grouped data with missing cells, intervals from an optimisation fit).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A numerical routine produced a non-finite value.
    #[error("numerical error{}: {message}", coordinate.map(|c| format!(" at coordinate {c}")).unwrap_or_default())]
    Numerical {
        message: String,
        /// Unconstrained-coordinate index, when the failure is localized.
        coordinate: Option<usize>,
    },

    /// The sampler could not find a valid starting point.
    #[error("initialization failed: {0}")]
    Init(String),

    /// A result object does not hold what the operation needs
    /// (e.g. draws requested from an empty fit).
    #[error("invalid state: {0}")]
    State(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical { message: msg.into(), coordinate: None }
    }

    pub fn numerical_at(msg: impl Into<String>, coordinate: usize) -> Self {
        Error::Numerical { message: msg.into(), coordinate: Some(coordinate) }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
