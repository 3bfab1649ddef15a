use thiserror::Error;

/// Everything that can end a run. The variant decides the exit status.
#[derive(Debug, Error)]
pub enum CliError {
    /// Help or version text requested; not a failure.
    #[error("{0}")]
    Info(String),

    /// Malformed command line.
    #[error("{0}")]
    Usage(String),

    /// Well-formed but out-of-range values.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Numerical(#[from] burgers_core::Error),

    /// A run produced no usable result, e.g. every sweep row failed.
    #[error("{0}")]
    Failed(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use burgers_core::Error as E;
        match self {
            CliError::Info(_) => 0,
            CliError::Usage(_) | CliError::Config(_) => 2,
            // rejected inputs rather than numerical breakdowns
            CliError::Numerical(
                E::Config(_) | E::IncompatibleBoundary { .. } | E::Resolution { .. },
            ) => 2,
            CliError::Numerical(_) | CliError::Failed(_) | CliError::Io { .. } => 1,
        }
    }
}
