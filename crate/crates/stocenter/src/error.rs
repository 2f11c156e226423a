use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("instance too large for enumeration: {0}")]
    InstanceTooLarge(String),
    #[error("combination guard exceeded: C({n},{k}) > {limit}")]
    CombinationGuardExceeded { n: usize, k: usize, limit: u64 },
    #[error("empty realization")]
    EmptyRealization,
    #[error("subset is not a full member of the coreset image")]
    NotFull,
    #[error("holant state space {size} exceeds guard {limit}")]
    StateSpaceGuardExceeded { size: u128, limit: u128 },
    #[error("candidate enumeration {size} exceeds guard {limit}")]
    EnumerationGuardExceeded { size: f64, limit: f64 },
    #[error("candidate center set has zero cost")]
    ZeroCostCandidate,
    #[error("reference center set has zero cost")]
    DegenerateCost,
    #[error("case mismatch: total probability {total} vs eps {eps}")]
    CaseMismatch { total: f64, eps: f64 },
    #[error("no lifted point lies inside the swept convex set")]
    EmptyK,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unsupported flat dimension j={0}; only j in {{0,1}} is supported")]
    UnsupportedFlat(usize),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for the errors raised by size guards.
    pub fn is_guard(&self) -> bool {
        matches!(
            self,
            Error::InstanceTooLarge(_)
                | Error::CombinationGuardExceeded { .. }
                | Error::StateSpaceGuardExceeded { .. }
                | Error::EnumerationGuardExceeded { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
