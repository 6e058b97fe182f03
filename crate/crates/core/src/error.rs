use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension must be 1, 2 or 3 (got {0})")]
    BadDimension(usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("operation requires dim >= 2")]
    NeedsFibers,
    #[error("denominator must be positive")]
    ZeroDenominator,
    #[error("empty set")]
    EmptySet,
    #[error("parameter t must lie strictly between 0 and 1 (got {0})")]
    BadT(String),
    #[error("parameter tau must satisfy 0 < tau <= 1/2 (got {0})")]
    BadTau(String),
    #[error("lattice too fine: {0} exceeds the 2^20 guard")]
    DenominatorOverflow(u128),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("empty projection")]
    EmptyProjection,
    #[error("zero sup-slice measure")]
    ZeroSupSlice,
    #[error("degenerate support")]
    DegenerateSupport,
    #[error("densities must have unit mass")]
    NotNormalized,
    #[error("endpoint {0} missing from the domain")]
    MissingEndpoint(String),
    #[error("degenerate domain")]
    DegenerateDomain,
    #[error("inconsistent input: {0}")]
    Inconsistent(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
