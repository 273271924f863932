use thiserror::Error;

/// Errors raised by the analytic and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A system or experiment description is invalid (e.g. non-square array).
    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("shape mismatch: expected length {expected}, got {actual}")]
    Shape { expected: usize, actual: usize },

    /// The channel carries no energy along the optimized direction.
    #[error("degenerate channel: {0}")]
    DegenerateChannel(&'static str),

    /// The request is valid but beyond what the routine supports.
    #[error("capability exceeded: {0}")]
    Capability(String),

    /// A self-check of the beamforming pipeline exceeded its tolerance.
    #[error("verification failed at trial {trial}: relative deviation {deviation:e} exceeds {tolerance:e}")]
    Verification {
        trial: u64,
        deviation: f64,
        tolerance: f64,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
