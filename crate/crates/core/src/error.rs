use thiserror::Error;

/// Errors produced by model constructors and numeric routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numeric routine failed to reach its accuracy target.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A configuration (table, model file, simulation setup) is malformed.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
