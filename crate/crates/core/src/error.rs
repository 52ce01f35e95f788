use thiserror::Error;

/// Errors raised by state construction, closed forms and the Monte Carlo engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid bipartite dimensions ({da}, {db})")]
    InvalidDims { da: usize, db: usize },

    #[error("matrix is not Hermitian (max |M - M^dag| = {0:e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("matrix is not positive semi-definite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("invalid probability vector: {0}")]
    InvalidSpectrum(String),

    #[error("unsupported Weingarten order k = {0} (only k <= 3 is available)")]
    UnsupportedOrder(usize),

    #[error("invalid integer partition {0:?}")]
    InvalidPartition(Vec<usize>),

    #[error("k={k} Weingarten undefined at d={d}")]
    DegenerateDimension { k: usize, d: usize },

    #[error("formula requires d >= {min}, got d = {d}")]
    DimensionTooSmall { min: usize, d: usize },

    #[error("Page formula requires 1 <= m <= n, got m = {m}, n = {n}")]
    PageOrder { m: usize, n: usize },

    #[error("balanced dimensions required, got ({da}, {db})")]
    UnbalancedDims { da: usize, db: usize },

    #[error("Kraus operators are not trace preserving (deviation {0:e})")]
    NotTracePreserving(f64),

    #[error("channel must be square, got {rows}x{cols} Kraus operators")]
    NonSquareChannel { rows: usize, cols: usize },

    #[error("empty Kraus list")]
    EmptyChannel,

    #[error("invalid Monte Carlo configuration: {0}")]
    InvalidConfig(String),

    #[error("per-sample invariant violated: {0}")]
    InvariantViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
