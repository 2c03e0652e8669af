use std::io;
use std::path::PathBuf;

use tapelearn::game::GameError;
use tapelearn::history::{HistoryError, ManifestError};
use tapelearn::{LearnerError, OracleError};

pub const EXIT_USAGE: u8 = 64;
pub const EXIT_UNKNOWN: u8 = 65;
pub const EXIT_VIOLATION: u8 = 70;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    File { path: PathBuf, source: io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{0}")]
    Unknown(OracleError),
    #[error("{0}")]
    Violation(String),
    #[error("writing output: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Unknown(_) => EXIT_UNKNOWN,
            CliError::Violation(_) => EXIT_VIOLATION,
            _ => EXIT_USAGE,
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Unknown { .. } => CliError::Unknown(e),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<LearnerError> for CliError {
    fn from(e: LearnerError) -> Self {
        match e {
            LearnerError::Oracle(o) => o.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<GameError> for CliError {
    fn from(e: GameError) -> Self {
        match e {
            GameError::Learner(l) => l.into(),
            GameError::InvariantViolation(_) => CliError::Violation(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<HistoryError> for CliError {
    fn from(e: HistoryError) -> Self {
        match e {
            HistoryError::Oracle(o) => o.into(),
            HistoryError::Learner(l) => l.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<ManifestError> for CliError {
    fn from(e: ManifestError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Output(e.to_string())
    }
}
