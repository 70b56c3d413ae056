use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] qlab_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for anything the user can fix by changing inputs, 1 for numerical or IO failure.
    pub fn exit_code(&self) -> i32 {
        use qlab_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Core(
                E::InvalidGrid(_)
                | E::GridMismatch
                | E::InvalidValues(_)
                | E::Domain(_)
                | E::OutOfRange(_)
                | E::InvalidParameter(_)
                | E::UnderTransmission { .. }
                | E::NoTransmission { .. }
                | E::TotalInternalReflection { .. },
            ) => 2,
            CliError::Core(_) | CliError::Io(_) => 1,
        }
    }
}
