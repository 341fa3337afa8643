//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the screening, simulation, and reporting routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Matrix or vector shapes do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A parameter is outside its documented range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An input value is NaN or infinite.
    #[error("non-finite value in {context} at row {row}, column {col}")]
    NonFinite {
        context: &'static str,
        row: usize,
        col: usize,
    },

    /// The response never varies, so correlation-based scores are undefined.
    #[error("zero-variance response")]
    ZeroVarianceResponse,

    /// A numerical routine failed (factorization breakdown, no convergence).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Malformed input data: CSV cells, manifest fields, file layout.
    #[error("{0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
