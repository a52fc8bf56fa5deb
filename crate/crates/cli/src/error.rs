use thiserror::Error;

/// CLI failure, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad scenario, flags or plan description.
    #[error("config error: {0}")]
    Config(String),
    /// Unreadable or inconsistent dataset, or an output that cannot be written.
    #[error("data error: {0}")]
    Data(String),
    /// The algorithm has no valid answer for this input.
    #[error("algorithm infeasible: {0}")]
    Algorithm(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Algorithm(_) => 4,
        }
    }

    /// Library error raised while building configuration.
    pub fn config(e: multiband::Error) -> Self {
        CliError::Config(e.to_string())
    }

    /// Library error raised while running an algorithm.
    pub fn algorithm(e: multiband::Error) -> Self {
        match e {
            multiband::Error::StateMismatch { .. } => CliError::Data(e.to_string()),
            other => CliError::Algorithm(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
