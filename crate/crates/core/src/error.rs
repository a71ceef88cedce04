use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("mode count must be at least 1")]
    ZeroModes,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("expected a square matrix of even dimension, found {rows}x{cols}")]
    NotEvenSquare { rows: usize, cols: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not symmetric (largest asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),

    #[error("covariance violates the uncertainty relation: smallest eigenvalue of C + iJ/2 is {0:e}")]
    UncertaintyViolation(f64),

    #[error("matrix is not symplectic (residual {0:e})")]
    NotSymplectic(f64),

    #[error("inverse temperature must be positive, found {0}")]
    InvalidInverseTemperature(f64),

    #[error("probability must lie in [0, 1], found {0}")]
    InvalidProbability(f64),

    #[error("alpha must lie strictly between 0 and 1, found {0}")]
    InvalidAlpha(f64),

    #[error("mode index {index} out of range for a {modes}-mode state")]
    ModeOutOfRange { index: usize, modes: usize },

    #[error("truncation dimension must be at least 2, found {0}")]
    InvalidTruncation(usize),

    #[error("operator is not a valid density matrix: {0}")]
    InvalidDensity(String),

    #[error("state is outside what the Fock oracle can represent: {0}")]
    NotRepresentable(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("invalid state file: {0}")]
    StateFile(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
