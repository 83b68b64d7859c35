use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Input outside the domain of the operation (zero argument, singular
    /// matrix, failed precondition).
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested symbol or power test is not implemented for this
    /// place/modulus combination (wild symbols).
    #[error("unsupported backend: {0}")]
    UnsupportedBackend(String),

    /// Two objects built over different parameters were combined.
    #[error("parameter mismatch: {0}")]
    ParamMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
