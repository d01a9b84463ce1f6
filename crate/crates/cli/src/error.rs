use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_PHYSICS: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed or incomplete scenario file.
    #[error("{0}")]
    Parse(String),

    /// Well-formed scenario whose values break a precondition.
    #[error("{0}")]
    Validation(String),

    /// Failure while computing.
    #[error("{0}")]
    Physics(#[from] cvqkd_core::Error),

    /// Vacuum calibration disagrees with the analytic shot-noise level.
    #[error("calibration failed: |z| = {0:.3} exceeds 3")]
    Calibration(f64),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Physics(_) | CliError::Calibration(_) => EXIT_PHYSICS,
            CliError::Io { .. } => EXIT_IO,
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }
}
