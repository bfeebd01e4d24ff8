use std::io;

/// Crate-wide error type.
///
/// Errors fall into two broad categories that callers (notably the CLI)
/// distinguish: rejected inputs and numerical failures. IO and parse errors
/// count as input problems.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A precondition on the inputs was violated.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A numerical procedure failed to converge or left its valid regime.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("io error: {0}")]
    Io(#[from] io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// True for errors that mean "the request was malformed", as opposed to
    /// "the computation broke down".
    pub fn is_precondition(&self) -> bool {
        !matches!(self, Error::Numerical(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
