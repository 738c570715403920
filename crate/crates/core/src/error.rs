use thiserror::Error;

/// Errors raised by every module of the crate.
///
/// The variants map one-to-one onto the CLI exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Caller misuse: mismatched spaces, exponents out of range, bad names.
    #[error("usage error: {0}")]
    Usage(String),
    /// Malformed input data.
    #[error("parse error: {0}")]
    Parse(String),
    /// Mathematically undefined request (zero vectors, empty cones).
    #[error("domain error: {0}")]
    Domain(String),
    /// A numerical routine could not produce a result.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    /// Process exit code for this error: 2 usage/parse, 3 domain, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Parse(_) => 2,
            Error::Domain(_) => 3,
            Error::Internal(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
