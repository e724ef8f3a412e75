use std::path::PathBuf;

/// Failure of a run, classified by exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// The configuration or an override is invalid.
    #[error("{0}")]
    Config(String),
    /// A computation failed on valid input.
    #[error("{0}")]
    Numerical(cmv_core::Error),
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Numerical(_) => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numerical(_) => "numerical",
            CliError::Io { .. } => "io",
        }
    }
}

impl From<cmv_core::Error> for CliError {
    fn from(e: cmv_core::Error) -> Self {
        use cmv_core::Error::*;
        match e {
            EigenNoConvergence | ResolventSingular { .. } | Overflow | DepthExceeded { .. } => {
                CliError::Numerical(e)
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}
