use thiserror::Error;

pub type Result<T> = std::result::Result<T, OvalError>;

/// Every failure the library can report.
///
/// Variants fall in two classes: invalid input (a caller broke a documented
/// precondition) and numerical failure (the input was fine but a solver or a
/// structural check on the computed data did not succeed). The CLI maps the
/// first class to exit status 1 and the second to exit status 2.
#[derive(Debug, Error)]
pub enum OvalError {
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("eigensolver did not converge after {iterations} iterations (off-diagonal residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("curvature is not positive: min κ = {kappa:e} at s = {s}")]
    Positivity { s: f64, kappa: f64 },

    #[error("closure projection failed after {iterations} Newton steps (residual {residual:e})")]
    Projection { iterations: usize, residual: f64 },

    #[error("random oval sampling failed after {rejections} consecutive rejections; amplitude too large")]
    Sampling { rejections: usize },

    #[error("insufficient bound states: requested {requested}, found {found}")]
    InsufficientBoundStates { requested: usize, found: usize },

    #[error("potential not truncated: V(±L) = {tail:e} exceeds 1e-10 × max V = {max:e}")]
    Truncation { tail: f64, max: f64 },

    #[error("arclength map is flat near x = {x}: density vanishes on an interval")]
    FlatMap { x: f64 },

    #[error("common node of the eigenfunction pair near x = {x} (ρ² = {rho_sq:e})")]
    Node { x: f64, rho_sq: f64 },

    #[error("angle unwrap failed near x = {x}: jump {jump} exceeds π/2")]
    Unwrap { x: f64, jump: f64 },

    #[error("unsupported coupling g = {0}: the half-bound certificate needs g = 1")]
    UnsupportedCoupling(f64),

    #[error("pointwise splitting bound violated at x = {x} by {excess:e}")]
    SplittingViolation { x: f64, excess: f64 },

    #[error("ground state is degenerate: spectral gap {gap:e} below threshold")]
    Degenerate { gap: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl OvalError {
    /// True for errors that stem from bad input rather than from a numerical
    /// computation that failed on valid input.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            OvalError::Contract(_)
                | OvalError::Domain(_)
                | OvalError::Positivity { .. }
                | OvalError::Sampling { .. }
                | OvalError::Truncation { .. }
                | OvalError::UnsupportedCoupling(_)
                | OvalError::Parse(_)
                | OvalError::Io(_)
        )
    }
}
