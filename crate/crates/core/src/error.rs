use alloc::string::String;

/// Errors raised by the library.
///
/// Variants split into validation problems (bad inputs) and numerical
/// failures (a computation could not reach its contract); see
/// [`Error::is_numerical`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("density reconstruction is negative (minimum {min:e})")]
    NegativeDensity { min: f64 },
    #[error("smooth prior exhausted its budget after {rejections} rejections")]
    RejectionsExhausted { rejections: usize },
    #[error("non-finite density ratio at sample {index}")]
    NonFinite { index: usize },
    #[error("moment matching reached error {achieved:e} (tolerance {tolerance:e})")]
    MomentMismatch { achieved: f64, tolerance: f64 },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// True for failures of a numerical procedure, false for invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::RejectionsExhausted { .. } | Error::NonFinite { .. } | Error::MomentMismatch { .. }
        )
    }
}

pub type Result<T> = core::result::Result<T, Error>;
