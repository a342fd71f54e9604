use thiserror::Error;

/// Error type shared across the simulator, solvers and the case memory.
#[derive(Debug, Error)]
pub enum QcbrError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The instance cannot be solved as posed (e.g. more workers than patients).
    #[error("infeasible instance: {0}")]
    Infeasible(String),

    /// Degenerate geometry or data (e.g. all pairwise distances equal).
    #[error("degenerate instance: {0}")]
    Degenerate(String),

    /// Requested register exceeds the dense-statevector bound.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// Optimizer produced a non-finite objective; the partial cost trace is attached.
    #[error("training failure after {} iterations", trace.len())]
    TrainingFailure { trace: Vec<f64> },

    /// The case memory has no retained case to build on; caller falls back to a full solve.
    #[error("no experience: {0}")]
    NoExperience(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, QcbrError>;

impl QcbrError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        QcbrError::InvalidArgument(msg.into())
    }
}
