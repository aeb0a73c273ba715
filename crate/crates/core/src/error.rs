use thiserror::Error;

/// Errors raised while building or evaluating the function spaces.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("lattice basis is rank deficient (smallest singular value {smallest:e}, largest {largest:e})")]
    RankDeficient { smallest: f64, largest: f64 },

    #[error("phase table does not define a character: {0}")]
    NotACharacter(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("value out of floating point range in {0}")]
    Overflow(&'static str),

    #[error("theta series does not converge: imaginary part of the period matrix is not positive definite")]
    NotConvergent,

    #[error("theta truncation radius {radius} exceeds the cap {cap}")]
    TruncationFailure { radius: usize, cap: usize },

    #[error("quadrature not converged: error estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    QuadratureNotConverged { estimate: f64, tolerance: f64 },

    #[error("integrand does not decay at the truncation box boundary (relative magnitude {ratio:e})")]
    DecayViolation { ratio: f64 },

    #[error("matrix is singular or has no positive definite real part")]
    SingularMatrix,
}

impl Error {
    /// Stable machine-readable code, used in CLI error documents.
    pub fn code(&self) -> &'static str {
        match self {
            Error::RankDeficient { .. } => "RankDeficient",
            Error::NotACharacter(_) => "NotACharacter",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidInput(_) => "InvalidInput",
            Error::Overflow(_) => "Overflow",
            Error::NotConvergent => "NotConvergent",
            Error::TruncationFailure { .. } => "TruncationFailure",
            Error::QuadratureNotConverged { .. } => "QuadratureNotConverged",
            Error::DecayViolation { .. } => "DecayViolation",
            Error::SingularMatrix => "SingularMatrix",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
