use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// `1 - q e^{-2 alpha r}` vanishes at `r`.
    #[error("potential pole at r = {r}")]
    Pole { r: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    /// A square-root radicand of the Nikiforov-Uvarov coefficients is negative.
    #[error("complex coefficient: {name} radicand = {value}")]
    ComplexCoefficient { name: &'static str, value: f64 },

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("divergent integral: {0}")]
    Divergence(String),

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("invalid state: {0}")]
    Validity(String),
}

pub type Result<T> = std::result::Result<T, Error>;
