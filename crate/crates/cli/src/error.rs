use std::fmt;

use polaraug::io::FormatError;
use polaraug::Error;

/// Process exit codes.
pub const EXIT_DOMAIN: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: EXIT_USAGE, message: message.into() }
    }

    pub fn domain(message: impl Into<String>) -> Self {
        CliError { code: EXIT_DOMAIN, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::usage(e.to_string())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::SingularCalibration { .. }
            | Error::EmptyMask
            | Error::NotOrthogonal { .. }
            | Error::Linalg(_)
            | Error::Decompose(_) => CliError::domain(e.to_string()),
            Error::InvalidDimensions { .. }
            | Error::DimensionMismatch { .. }
            | Error::NonFinite { .. }
            | Error::InvalidArgument(_) => CliError::usage(e.to_string()),
        }
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;
