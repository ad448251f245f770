use thiserror::Error;

/// Errors raised by the moment-dynamics library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate state: position variance {dxx} is not positive")]
    DegenerateState { dxx: f64 },

    #[error("uncertainty violation: casimir {casimir:e} below bound {bound:e}")]
    UncertaintyViolation { casimir: f64, bound: f64 },

    #[error("position {x} outside the potential domain")]
    Domain { x: f64 },

    #[error("singularity at t = {t}: {reason}")]
    Singularity { t: f64, reason: String },

    #[error("no representing distribution: Hankel matrix has eigenvalue {min_eigenvalue:e}")]
    NoRepresentingDistribution { min_eigenvalue: f64 },

    #[error("unsupported moment order {order}: {reason}")]
    UnsupportedOrder { order: usize, reason: String },

    #[error("density {rho:e} below floor at x = {x}")]
    DensityFloor { x: f64, rho: f64 },

    #[error("particle escaped: r = {r} at t = {t} with outward momentum")]
    Escape { t: f64, r: f64 },

    #[error("no return before t = {t_max}")]
    NoReturn { t_max: f64 },

    #[error("quadrature did not converge: error estimate {estimate:e} above target {target:e}")]
    QuadratureNonConvergence { estimate: f64, target: f64 },

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
