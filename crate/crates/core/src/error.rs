use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error("polynomial has repeated roots: {0}")]
    RepeatedRoots(String),
    #[error("exponent budget violated: {0}")]
    BudgetViolation(String),
    #[error("branch tracking failed: {0}")]
    BranchTracking(String),
    #[error("integer overflow: {0}")]
    Overflow(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
