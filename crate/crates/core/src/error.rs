use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug)]
pub enum Error {
    #[error("basis is singular (columns linearly dependent)")]
    SingularBasis,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("enumeration dimension cap exceeded: n = {n}, cap = {cap}")]
    DimensionCap { n: usize, cap: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("malformed witness: {0}")]
    MalformedWitness(String),

    #[error("budget exceeded: required log2 cost {required_log2:.2} > budget log2 {budget_log2:.2} ({what})")]
    BudgetExceeded {
        what: String,
        required_log2: f64,
        budget_log2: f64,
    },

    #[error("fixture promise violation: {0}")]
    PromiseViolation(String),

    #[error("SIS oracle calibration failed: {0}")]
    CalibrationFailure(String),

    #[error("phase limit exceeded after {phases} phases")]
    PhaseLimit { phases: usize },

    #[error("sampler retry limit exhausted: {0}")]
    RetryExhausted(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
