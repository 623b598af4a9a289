use std::fmt;
use std::process::ExitCode;

use cass_core::Error;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    NonConvergence(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Usage(_) => 2,
            CliError::NonConvergence(_) => 3,
            CliError::Io(_) => 4,
        })
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    /// Prefixes the message with `context`, keeping the category.
    pub fn context(self, context: &str) -> Self {
        match self {
            CliError::Usage(m) => CliError::Usage(format!("{context}: {m}")),
            CliError::NonConvergence(m) => CliError::NonConvergence(format!("{context}: {m}")),
            CliError::Io(m) => CliError::Io(format!("{context}: {m}")),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::NonConvergence(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "I/O failure: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::SvdFailed { .. }
            | Error::EigenFailed(_)
            | Error::Singular
            | Error::Infeasible { .. }
            | Error::PointSolve { .. }
            | Error::ZeroAffinity => CliError::NonConvergence(msg),
            Error::WrongMagic { .. }
            | Error::Truncated { .. }
            | Error::CountMismatch { .. }
            | Error::RaggedRow { .. }
            | Error::NonNumeric { .. }
            | Error::Io { .. }
            | Error::Csv(_) => CliError::Io(msg),
            _ => CliError::Usage(msg),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
