use thiserror::Error;

/// Errors surfaced by constructors and configuration-dependent operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates an invariant of the type being constructed.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: String,
    },
    /// Problem normalization produced a non-positive threshold, so the
    /// estimand is no longer a right tail.
    #[error("normalized threshold {0} is not positive; the estimand is not a right tail")]
    NonPositiveThreshold(String),
    /// The oracle cannot serve the requested instance.
    #[error("oracle does not support this instance: {0}")]
    UnsupportedOracle(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
