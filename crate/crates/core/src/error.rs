use thiserror::Error;

/// Errors surfaced by the optimizer, the objective suite and the regret harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("Lipschitz constant must be positive and finite, got {0}")]
    InvalidLipschitz(f64),

    #[error("objective returned a non-finite value {value} at t={t}")]
    NonFiniteValue { t: usize, value: f64 },

    #[error("candidate queue is exhausted")]
    Exhausted,

    #[error("candidate #{0} is not outstanding (never asked, or already told)")]
    UnknownCandidate(u64),

    #[error("horizon must be at least 1")]
    EmptyHorizon,

    #[error("trace is empty")]
    EmptyTrace,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unknown objective `{0}`")]
    UnknownObjective(String),

    #[error("objective spec `{spec}`: {reason}")]
    BadObjectiveSpec { spec: String, reason: String },

    #[error("oracle budget exceeded: {points} lattice points (limit {limit})")]
    OracleBudget { points: u128, limit: u128 },

    #[error("rate fit: {0}")]
    RateFit(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
