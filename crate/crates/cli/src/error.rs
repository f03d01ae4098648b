use thiserror::Error;

/// CLI-level errors, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Configuration file could not be parsed (exit 2).
    #[error("parse error: {0}")]
    Parse(String),

    /// A value in the configuration or on the command line is invalid
    /// (exit 3).
    #[error("domain error: {0}")]
    Domain(String),

    /// A resource cap was exceeded (exit 4).
    #[error("resource limit: {0}")]
    Resource(String),

    /// Filesystem trouble (exit 1).
    #[error("io error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Resource(_) => 4,
        }
    }
}

impl From<cyclocap::Error> for CliError {
    fn from(e: cyclocap::Error) -> Self {
        match e {
            cyclocap::Error::Resource(m) => CliError::Resource(m),
            cyclocap::Error::Config(m)
            | cyclocap::Error::Domain(m)
            | cyclocap::Error::Unsupported(m) => CliError::Domain(m),
            cyclocap::Error::Internal(m) => CliError::Domain(format!("internal: {m}")),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
