use std::fmt;

use sns_core::Error;

/// Failure of a subcommand, carrying its process exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad configuration or arguments (exit 2).
    Validation(String),
    /// The decoy bound does not apply to the requested intensities (exit 3).
    Infeasible(String),
    /// Exit 4.
    Io(String),
    /// A bound was violated against the oracle (exit 5).
    Soundness(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Io(_) => 4,
            CliError::Soundness(_) => 5,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Infeasible(m) => write!(f, "infeasible: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Soundness(m) => write!(f, "soundness failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Validity(_) | Error::Infeasible(_) => CliError::Infeasible(e.to_string()),
            // numeric and truncation failures mean the inputs are outside the
            // range the series and the oracle cutoff can handle
            _ => CliError::Validation(e.to_string()),
        }
    }
}
