use std::path::Path;

use hrvkit_core::Error as CoreError;
use serde::Serialize;

pub type Result<T> = std::result::Result<T, CliError>;

/// Failures grouped by the exit code the binary reports for them.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Internal(String),
}

#[derive(Debug, Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    exit_code: i32,
    message: String,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Internal(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Data(_) => "data",
            CliError::Internal(_) => "internal",
        }
    }

    /// One-line JSON description for stderr.
    pub fn to_json(&self) -> String {
        let report = ErrorReport {
            error: self.kind(),
            exit_code: self.exit_code(),
            message: self.to_string(),
        };
        serde_json::to_string(&report).unwrap_or_else(|_| self.to_string())
    }

    pub fn read(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Data(format!("{}: {err}", path.display()))
    }

    pub fn write(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Internal(format!("writing {}: {err}", path.display()))
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        match e {
            CoreError::InvalidParameter { .. }
            | CoreError::UnknownFeature(_)
            | CoreError::TooManyFolds { .. }
            | CoreError::NeighboursExceedRows { .. } => CliError::Config(msg),
            CoreError::EmptyRegion(_) | CoreError::SpectrumCoverage { .. } => {
                CliError::Internal(msg)
            }
            _ => CliError::Data(msg),
        }
    }
}

/// Error for a path that could not be found, naming the path.
pub fn missing(path: &Path) -> CliError {
    CliError::Data(format!("{}: file not found", path.display()))
}
