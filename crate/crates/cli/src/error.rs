use std::io;

/// Errors surfaced by the experiment runner.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Invalid flags or configuration document.
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] ris_miso::Error),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("malformed result file: {0}")]
    Format(String),
}

impl CliError {
    /// Process exit status: 1 for usage/configuration, 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Core(ris_miso::Error::Configuration(_) | ris_miso::Error::Domain(_)) => 1,
            _ => 2,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Format(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Format(e.to_string())
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
