use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("infeasible configuration: {0}")]
    Infeasible(String),

    #[error("missing data: {0}")]
    MissingData(String),

    #[error(transparent)]
    Core(#[from] tilecast_core::Error),
}

impl CliError {
    /// Process exit code: 2 usage, 3 infeasible, 4 missing data, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        use tilecast_core::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::MissingData(_) => 4,
            CliError::Core(E::Infeasible(_)) => 3,
            CliError::Core(E::Precondition(_)) => 2,
            CliError::Core(E::Io { .. } | E::Parse { .. } | E::Data(_)) => 4,
            CliError::Core(_) => 1,
        }
    }
}
