use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by every module of the crate.
///
/// The variant names double as the stable error names reported by the CLI.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("GridMismatch: {0}")]
    GridMismatch(String),

    #[error("DegenerateWavepacket: wavepacket has zero norm")]
    DegenerateWavepacket,

    #[error("TruncationError: {0}")]
    Truncation(String),

    #[error("InvalidParameter: {0}")]
    InvalidParameter(String),

    #[error("DegenerateKernel: {0}")]
    DegenerateKernel(String),

    #[error("ResolutionError: {0}")]
    Resolution(String),
}

impl Error {
    pub fn name(&self) -> &'static str {
        match self {
            Error::GridMismatch(_) => "GridMismatch",
            Error::DegenerateWavepacket => "DegenerateWavepacket",
            Error::Truncation(_) => "TruncationError",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::DegenerateKernel(_) => "DegenerateKernel",
            Error::Resolution(_) => "ResolutionError",
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
