use revchain::ChainError;
use thiserror::Error;

/// Failure of a command, carrying its exit code class.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable input: bad JSON, missing keys, malformed numbers. Exit 2.
    #[error("parse error: {0}")]
    Parse(String),
    /// Input parsed but violates a structural requirement. Exit 3.
    #[error("validation error: {0}")]
    Validation(String),
    /// The requested computation route does not apply to this chain. Exit 4.
    #[error("route refused: {0}")]
    Refused(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Refused(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "parse",
            CliError::Validation(_) => "validation",
            CliError::Refused(_) => "route_refused",
        }
    }

    pub fn field(field: &str, e: ChainError) -> Self {
        match CliError::from(e) {
            CliError::Parse(m) => CliError::Parse(format!("{field}: {m}")),
            CliError::Validation(m) => CliError::Validation(format!("{field}: {m}")),
            CliError::Refused(m) => CliError::Refused(format!("{field}: {m}")),
        }
    }

    pub fn context(self, what: &str) -> Self {
        match self {
            CliError::Parse(m) => CliError::Parse(format!("{what}: {m}")),
            CliError::Validation(m) => CliError::Validation(format!("{what}: {m}")),
            CliError::Refused(m) => CliError::Refused(format!("{what}: {m}")),
        }
    }
}

impl From<ChainError> for CliError {
    fn from(e: ChainError) -> Self {
        match e {
            ChainError::PeriodicChain { .. } | ChainError::TruncationLimit { .. } => {
                CliError::Refused(e.to_string())
            }
            other => CliError::Validation(other.to_string()),
        }
    }
}
