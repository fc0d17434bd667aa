use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid order {0}: must exceed {1}")]
    InvalidOrder(f64, f64),
    #[error("overflow evaluating {0}")]
    Overflow(&'static str),
    #[error("lambda must be nonzero")]
    ZeroLambda,
    #[error("series diverges: |w| = {0} >= 1")]
    Divergent(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("pole: {0}")]
    Pole(&'static str),
    #[error("adaptive quadrature did not converge within {0} subintervals (estimated error {1:e})")]
    QuadratureBudget(usize, f64),
    #[error("degenerate fit: {0}")]
    DegenerateFit(&'static str),
    #[error("grid mismatch: {0}")]
    GridMismatch(&'static str),
    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("unsupported dimension n = {0}")]
    UnsupportedDimension(usize),
    #[error("exceptional lambda: sin(lambda * s0) = {0:e}")]
    ExceptionalLambda(f64),
    #[error("caustic time: sin(2s) = {0:e}")]
    Caustic(f64),
    #[error("degenerate ratio: right-hand side vanishes on the whole grid")]
    DegenerateRatio,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Non-fatal conditions detected while computing a result.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// The sampled function had not decayed at the truncation radius;
    /// carries the ratio of the boundary value to the peak.
    Truncation(f64),
    /// Interpolation requested values beyond the grid, carrying the given
    /// fraction of the integrand mass.
    Extrapolation(f64),
}
