use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("physics invariant violated: {0}")]
    Physics(String),

    #[error("optimizer not monotonic: {0}")]
    NonMonotonic(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Physics(_) => 3,
            CliError::NonMonotonic(_) => 4,
            CliError::Calibration(_) => 5,
            CliError::Io(_) => 1,
        }
    }
}

impl From<stirap_oct::Error> for CliError {
    fn from(e: stirap_oct::Error) -> Self {
        use stirap_oct::Error as E;
        match e {
            E::NonMonotonic { .. } => CliError::NonMonotonic(e.to_string()),
            E::NonFiniteField(_) | E::NotNormalized(_) | E::Propagation(_) => {
                CliError::Physics(e.to_string())
            }
            E::InvalidGrid(_)
            | E::GridMismatch(_)
            | E::TopologyMismatch(_)
            | E::IndexOutOfRange { .. }
            | E::DimensionMismatch { .. }
            | E::InvalidParams(_)
            | E::DegenerateField(_) => CliError::Config(e.to_string()),
        }
    }
}
