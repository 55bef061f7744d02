use std::process::ExitCode;

use thiserror::Error;

/// Process exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    CheckFailed = 1,
    InvalidInput = 2,
    NotConverged = 3,
    NotPsd = 4,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        ExitCode::from(s as u8)
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("input is not positive semidefinite: {0}")]
    NotPsd(String),
    #[error("solver did not converge: {0}")]
    NotConverged(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn status(&self) -> Status {
        match self {
            CliError::Input(_) | CliError::Io { .. } => Status::InvalidInput,
            CliError::NotPsd(_) => Status::NotPsd,
            CliError::NotConverged(_) => Status::NotConverged,
        }
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }
}

impl From<covmetric::Error> for CliError {
    fn from(e: covmetric::Error) -> Self {
        match e {
            covmetric::Error::Input(m) => CliError::Input(m),
            covmetric::Error::Domain(m) => CliError::NotPsd(m),
            e @ covmetric::Error::NotConverged { .. } => CliError::NotConverged(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
