use std::fmt;
use std::io;

use sdelimits::ErrorKind;

/// Failure of a subcommand, classified for the process exit code.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
    Io(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "invalid configuration: {m}"),
            CliError::Numeric(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<sdelimits::Error> for CliError {
    fn from(e: sdelimits::Error) -> Self {
        match e.kind() {
            ErrorKind::Config => CliError::Config(e.to_string()),
            ErrorKind::Numeric => CliError::Numeric(e.to_string()),
            ErrorKind::Io => CliError::Io(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
