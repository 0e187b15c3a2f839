use thiserror::Error;

/// CLI failures, split by exit code: invalid inputs, files, and artifacts
/// exit with 2; training/evaluation configuration problems exit with 3.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Config(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Config(_) => 3,
        }
    }
}

impl From<cqa_core::Error> for CliError {
    fn from(err: cqa_core::Error) -> Self {
        use cqa_core::Error::*;
        match err {
            DegenerateTrainingSet
            | SingleClassGold
            | NotEnoughGroups { .. }
            | InvalidParameter(_)
            | DegenerateComparison
            | EmptyInput(_)
            | LengthMismatch { .. } => CliError::Config(err.to_string()),
            _ => CliError::Input(err.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
