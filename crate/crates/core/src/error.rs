use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument `{field}`: {reason}")]
    InvalidArgument { field: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("kronecker product of dimension {dim} exceeds cap {cap}")]
    KronTooLarge { dim: usize, cap: usize },

    #[error("singular system: pivot {pivot:.3e} at column {column}, condition estimate {condition:.3e}")]
    Singular {
        column: usize,
        pivot: f64,
        condition: f64,
    },

    #[error("eigensolver did not converge for eigenvalue {index}")]
    NoConvergence { index: usize },

    #[error("graph is disconnected (lambda_2 = {lambda2:.3e})")]
    Disconnected { lambda2: f64 },

    #[error("graph with {n} nodes exceeds the cap of {cap} for {what}")]
    TooLarge {
        what: &'static str,
        n: usize,
        cap: usize,
    },

    #[error("no connected Erdos-Renyi sample after {attempts} attempts (n = {n}, p_er = {p_er})")]
    ConnectivityNotReached { n: usize, p_er: f64, attempts: usize },

    #[error("nonpositive denominator {value:.3e} at eigenvalue {eigenvalue:.6e}")]
    NonpositiveDenominator { eigenvalue: f64, value: f64 },

    #[error("I - K is near-singular (spectral norm estimate of K = {k_norm:.6})")]
    SlowMixing { k_norm: f64 },

    #[error("consensus conditions fail: {0}")]
    ConsensusConditions(String),

    #[error("parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidArgument {
        field,
        reason: reason.into(),
    }
}
