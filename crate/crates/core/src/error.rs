use thiserror::Error;

/// Errors raised by the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("algebra mismatch: {0}")]
    SpecMismatch(String),

    #[error("invalid algebra: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid projection: {0}")]
    InvalidProjection(String),

    #[error("degree {degree} out of range 0..={max}")]
    IndexOutOfRange { degree: usize, max: usize },

    #[error("differentials do not compose to zero at degree {degree} (residual {residual:e})")]
    NotAComplex { degree: usize, residual: f64 },

    #[error("expected {expected} parametrices, got {got}")]
    DegreeMismatch { expected: usize, got: usize },

    #[error("vector is not a cocycle: |D b| = {residual:e} exceeds {bound:e}")]
    NotACocycle { residual: f64, bound: f64 },

    #[error("coefficients must be nonzero")]
    ZeroCoefficient,

    #[error("empty sample set")]
    EmptySampleSet,

    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),

    #[error("embedding hypothesis violated: 2|alpha| + n - 2t = {exponent} must be < -1 (|alpha| = {order}, n = {dim}, t = {t})")]
    HypothesisViolated {
        order: usize,
        dim: usize,
        t: i32,
        exponent: i64,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
