use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("divergent mass: tail exponent {0} must exceed 2")]
    DivergentMass(f64),
    #[error("radius {radius} is beyond grid (r_max = {r_max})")]
    BeyondGrid { radius: f64, r_max: f64 },
    #[error("stencil underflow: need at least {needed} nodes, have {have}")]
    StencilUnderflow { needed: usize, have: usize },
    #[error("grid mismatch between fields")]
    GridMismatch,
    #[error("quadrature did not converge: achieved error {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },
    #[error("linear solve failed: {0}")]
    LinearSolve(String),
    #[error("negative density: cumulative mass decreases by {0:e}")]
    NegativeDensity(f64),
    #[error("newton iteration failed to converge (residual {0:e})")]
    Newton(f64),
    #[error("no core: cumulative mass never crosses {0}")]
    NoCore(f64),
    #[error("too few samples: {have} (need {needed})")]
    TooFewSamples { have: usize, needed: usize },
    #[error("insufficient span: {0}")]
    InsufficientSpan(String),
    #[error("ode integration failed at t = {t}: {reason}")]
    Ode { t: f64, reason: String },
    #[error("aliasing: quadrature grid of order {order} cannot resolve degree {l_max}")]
    Aliasing { order: usize, l_max: usize },
    #[error("nonzero mass: integral {0:e} of test function is not zero")]
    NonzeroMass(f64),
    #[error("degenerate projector: denominator {0:e}")]
    DegenerateProjector(f64),
    #[error("eigen solve failed: {0}")]
    Eigen(String),
    #[error("residual {residual:e} above tolerance {tol:e}")]
    Residual { residual: f64, tol: f64 },
    #[error("io error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
