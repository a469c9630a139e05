use thiserror::Error;

/// Library-wide error type.
///
/// The three variants map onto the CLI exit-code contract: `Usage` is a
/// caller mistake (exit 2), `Precision` means a requested tolerance or
/// truncation window cannot be honored (exit 3), and `Resource` means a
/// configured arithmetic budget was exceeded (exit 3).
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("usage: {0}")]
    Usage(String),
    #[error("precision: {0}")]
    Precision(String),
    #[error("resource: {0}")]
    Resource(String),
}

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
    pub fn precision(msg: impl Into<String>) -> Self {
        Error::Precision(msg.into())
    }
    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
