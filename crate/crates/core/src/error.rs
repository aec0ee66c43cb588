use std::fmt;

/// Errors raised by parsing, validation and the solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A value violates a documented constraint. `field` locates it.
    InvalidInput { field: String, reason: String },
    /// A document could not be read at all.
    Parse(String),
    /// A numerical routine could not produce an answer.
    Solver(String),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn solver(msg: impl Into<String>) -> Self {
        Error::Solver(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput { field, reason } => write!(f, "invalid `{field}`: {reason}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
            Error::Solver(msg) => write!(f, "solver failure: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
