use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A request exceeds the sieve capacity or the configured block budget.
    #[error("resource error: {0}")]
    Resource(String),
    /// An invalid experiment or command configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// A caller broke a documented precondition (e.g. a composite passed as a prime).
    #[error("contract violation: {0}")]
    Contract(String),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Resource(_) => 2,
            _ => 1,
        }
    }
}
