use thiserror::Error;

/// Errors raised by the library and the command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("feasibility error: {0}")]
    Feasibility(String),
    #[error("no candidate parameters certified epsilon <= {target}; best epsilon_hat found = {best_epsilon_hat}")]
    Infeasible { target: f64, best_epsilon_hat: f64 },
    #[error("index out of range: {0}")]
    Index(String),
    #[error("enumeration too large: {0}")]
    TooLarge(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
