use thiserror::Error;

/// Errors produced by the analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("root refinement failed to converge: {0}")]
    IllConditioned(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("ODE step size underflow at t = {t:.6e} (h = {h:.3e})")]
    OdeStepUnderflow { t: f64, h: f64 },

    #[error("shooting did not converge after {iterations} iterations (residual {residual:.3e})")]
    ShootingDiverged { iterations: usize, residual: f64 },

    #[error("continuation terminated: {0}")]
    ContinuationFailed(String),

    #[error("defining conditions hold but every nondegeneracy test fails: {0}")]
    Unclassifiable(String),

    #[error("bracketing failed on [{lo:.6e}, {hi:.6e}]: {what}")]
    BracketingFailed { lo: f64, hi: f64, what: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
