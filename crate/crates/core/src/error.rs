use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("triangular matrix is singular at diagonal index {0}")]
    SingularTriangular(usize),

    #[error("eigendecomposition did not converge within {0} iterations")]
    NoConvergence(usize),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid generator configuration: {0}")]
    InvalidConfig(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("could not bracket the root of the secular function")]
    BracketFailure,

    #[error("multiplier denominator vanished")]
    DegenerateDenominator,

    #[error("secular function evaluated at a pole (zeta = {0})")]
    PoleHit(f64),

    #[error("no acceptable root of the secular function was found")]
    RootNotFound,

    #[error("magnitude vector is zero")]
    ZeroVector,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
