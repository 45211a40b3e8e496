//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by validation, numerics and orchestration.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input violated a documented precondition.
    #[error("validation error: {0}")]
    Validation(String),
    /// Operand dimensions do not agree.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    /// A tensor product would exceed the configured entry cap.
    #[error("capacity exceeded: {requested} entries requested, cap is {cap}")]
    Capacity { requested: usize, cap: usize },
    /// A Hermitian operator was required.
    #[error("operator is not Hermitian (max |H - H^dagger| = {0:e})")]
    NotHermitian(f64),
    /// Block inversion during adiabatic elimination failed.
    #[error("singular block: {0}")]
    Singular(String),
    /// Adaptive integration could not reach the requested tolerance.
    #[error("integration error: {0}")]
    Integration(String),
    /// A numerical search (e.g. swap-time location) found no admissible optimum.
    #[error("search error: {0}")]
    Search(String),
    /// File-system or serialization failure at the experiment boundary.
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
