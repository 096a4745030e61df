use std::fmt;
use std::io;
use std::path::PathBuf;

/// Exit status of a command.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Pass = 0,
    Config = 2,
    Invariant = 3,
    Io = 4,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// A config problem tied to the offending field.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl fmt::Display) -> Self {
        Self {
            field: field.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config field `{}`: {}", self.field, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(ConfigError),

    #[error("{0}")]
    Core(#[from] blaschke_core::Error),

    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },

    #[error("malformed input: {0}")]
    Format(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn status(&self) -> ExitStatus {
        use blaschke_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Format(_) => ExitStatus::Config,
            CliError::Invariant(_) => ExitStatus::Invariant,
            CliError::Io { .. } => ExitStatus::Io,
            CliError::Core(e) => match e {
                E::InvariantViolation(_) | E::Singular(_) | E::RootFinder { .. } => {
                    ExitStatus::Invariant
                }
                _ => ExitStatus::Config,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
