use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// An adaptive scheme hit its refinement cap before meeting its tolerance.
    #[error("accuracy error: {0}")]
    Accuracy(String),
    /// Inconsistent configuration (mismatched rule exponent, unknown check id, ...).
    #[error("configuration error: {0}")]
    Config(String),
    /// A numerical kernel (eigen-solver, recurrence) failed.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// A requested object would exceed the memory bound.
    #[error("resource error: {0}")]
    Resource(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
