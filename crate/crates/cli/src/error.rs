use std::fmt;

use subpix_core::Error;

/// A failure with its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// A flag value outside its domain.
    Invalid {
        flag: &'static str,
        msg: String,
    },
    Core(Error),
}

impl CliError {
    pub fn invalid(flag: &'static str, msg: impl Into<String>) -> Self {
        CliError::Invalid { flag, msg: msg.into() }
    }

    /// 2 for invalid arguments, 3 for I/O, 4 for malformed input files,
    /// 5 for capacity and work-cap limits.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid { .. } => 2,
            CliError::Core(e) => match e {
                Error::Io(_) => 3,
                Error::Format(_) | Error::Json(_) => 4,
                Error::Capacity { .. } | Error::WorkCap { .. } => 5,
                _ => 2,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Invalid { flag, msg } => write!(f, "invalid value for {flag}: {msg}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

pub type CliResult<T> = Result<T, CliError>;
