use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid tap profile: {0}")]
    InvalidProfile(String),

    #[error("invalid RIS configuration: {0}")]
    InvalidRis(String),

    #[error("invalid OFDM configuration: {0}")]
    InvalidOfdm(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("band mismatch: expected {expected}, got {actual}")]
    BandMismatch { expected: String, actual: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("history of {got} rounds is shorter than the required {min}")]
    InsufficientHistory { got: usize, min: usize },

    #[error("degenerate history: {0}")]
    DegenerateHistory(String),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("the LoCKey scheme requires a prediction scalar per subcarrier")]
    MissingGamma,

    #[error("invalid quantization thresholds: {0}")]
    InvalidThresholds(String),

    #[error("empty input")]
    Empty,
}

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, actual })
    }
}
