use std::fmt;
use std::process::ExitCode;

use seqsqueeze::io::FormatError;
use seqsqueeze::CompressError;

/// Process exit statuses. The numeric values are a stable contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Mismatch = 1,
    Usage = 2,
    Io = 3,
    Budget = 4,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> ExitCode {
        ExitCode::from(s as u8)
    }
}

#[derive(Debug)]
pub struct CliError {
    pub status: Status,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            status: Status::Usage,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError {
            status: Status::Io,
            message: message.into(),
        }
    }

    /// Prefixes the message with the file it concerns.
    pub fn at(mut self, path: &std::path::Path) -> Self {
        self.message = format!("{}: {}", path.display(), self.message);
        self
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::io(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::io(format!("IoFailure: {e}"))
    }
}

impl From<CompressError> for CliError {
    fn from(e: CompressError) -> Self {
        let status = match &e {
            CompressError::UnavailableRatio { .. } | CompressError::CannotReachTarget { .. } => Status::Budget,
            CompressError::InvalidConfig(_) | CompressError::OracleTooLarge { .. } => Status::Usage,
            _ => Status::Io,
        };
        let name = match &e {
            CompressError::NonFiniteInput { .. } => "NonFiniteInput: ",
            CompressError::EmptyInput { .. } => "EmptyInput: ",
            CompressError::CannotReachTarget { .. } => "CannotReachTarget: ",
            _ => "",
        };
        CliError {
            status,
            message: format!("{name}{e}"),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
