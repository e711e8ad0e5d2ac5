use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sample rate mismatch: filter designed for {expected} Hz, buffer is {found} Hz")]
    SampleRateMismatch { expected: f64, found: f64 },

    #[error("empty input")]
    EmptyInput,

    #[error("tone at {freq_hz} Hz aliases at sample rate {sample_rate_hz} Hz (Nyquist {} Hz)", sample_rate_hz / 2.0)]
    Aliasing { freq_hz: f64, sample_rate_hz: f64 },

    #[error("malformed WAV header: {field}: {detail}")]
    MalformedHeader { field: &'static str, detail: String },

    #[error("truncated data: expected {expected} bytes, found {found}")]
    TruncatedData { expected: usize, found: usize },

    #[error("insufficient data: need {needed} values, have {available}")]
    InsufficientData { needed: usize, available: usize },

    #[error("malformed CSV at line {line}: {detail}")]
    MalformedCsv { line: usize, detail: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

/// Rejects zero, negative, NaN and infinite values.
pub(crate) fn require_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive and finite, got {value}")))
    }
}
