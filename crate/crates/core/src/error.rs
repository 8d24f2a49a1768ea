use thiserror::Error;

/// Errors raised across the kernel.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },
    #[error("axis {axis} out of range (dimension {dim})")]
    AxisOutOfRange { axis: usize, dim: usize },
    #[error("expected an even element")]
    NotEven,
    #[error("expected an odd element")]
    NotOdd,
    #[error("inhomogeneous element")]
    Inhomogeneous,
    #[error("body is not positive: {0}")]
    NonPositiveBody(String),
    #[error("body is not invertible in the expression grammar: {0}")]
    NonInvertibleBody(String),
    #[error("matrix is singular on the body: {0}")]
    BodySingular(String),
    #[error("matrix is not skew-symmetric")]
    NotSkew,
    #[error("odd matrix dimension {0}")]
    OddDimension(usize),
    #[error("no positive-definite invariant inner product: {0}")]
    NotCompact(String),
    #[error("quadrature: {0}")]
    Quadrature(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("submanifold: {0}")]
    Submanifold(String),
    #[error("not critical: {0}")]
    NotCritical(String),
    #[error("degenerate: {0}")]
    Degenerate(String),
    #[error("non-polynomial input: {0}")]
    NonPolynomial(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("scenario: {0}")]
    Scenario(String),
}

pub type Result<T> = std::result::Result<T, Error>;
