use thiserror::Error;

/// Errors raised by the eigenvalue laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("the Rayleigh quotient is undefined for a function with zero L^p mass")]
    ZeroFunction,

    #[error("shape mismatch: expected {expected} nodal values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("{0} is served by closed-form evaluation only")]
    Unsupported(String),

    #[error(
        "could not bracket the trace equation: Λ({alpha_lo}) = {lambda_lo}, Λ({alpha_hi}) = {lambda_hi}"
    )]
    Bracket {
        alpha_lo: f64,
        lambda_lo: f64,
        alpha_hi: f64,
        lambda_hi: f64,
    },

    #[error("eigenvalue solve did not converge at α = {alpha} (residual {residual:e})")]
    NotConverged { alpha: f64, residual: f64 },

    #[error("fit rejected: {0}")]
    FitRejected(String),
}

pub type Result<T> = std::result::Result<T, Error>;
