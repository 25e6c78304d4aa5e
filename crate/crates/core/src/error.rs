use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// An enumeration or table request exceeds a configured guard.
    #[error("capacity exceeded: {what} = {got} exceeds the limit {limit}")]
    Capacity {
        what: &'static str,
        got: usize,
        limit: usize,
    },
    /// A truncation or discretisation cannot deliver the requested accuracy.
    #[error("precision error: {0}")]
    Precision(String),
    /// The field model is malformed or its measure is not normalisable.
    #[error("model error: {0}")]
    Model(String),
    /// A fixed-point iteration grew instead of contracting.
    #[error("iteration does not contract: {0}")]
    NonContraction(String),
    /// A numerical oracle produced output that cannot be trusted.
    #[error("diagnostic: {0}")]
    Diagnostic(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
