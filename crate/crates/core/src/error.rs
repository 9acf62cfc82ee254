use thiserror::Error;

use crate::basis::CenterScheme;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("scale at index {index} must be positive, got {value}")]
    NonPositiveScale { index: usize, value: f64 },

    #[error("basis was generated with the {found} scheme, expected {expected}")]
    SchemeMismatch { expected: CenterScheme, found: CenterScheme },

    #[error("target has no usable mass on the domain: {attempts} consecutive rejections")]
    RejectionLimit { attempts: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("weights are not on the unit simplex (sum {sum}, min {min})")]
    NotOnSimplex { sum: f64, min: f64 },

    #[error("domain is not a hypercube")]
    NotHypercube,

    #[error("all coefficients are zero")]
    ZeroMass,

    #[error("integrand is not finite at x = {x}")]
    NonFiniteIntegrand { x: f64 },

    #[error("divergence is infinite: second argument vanishes at x = {x}")]
    InfiniteDivergence { x: f64 },

    #[error("function value {value} at x = {x} is below the lower bound {bound}")]
    LowerBoundViolated { x: f64, value: f64, bound: f64 },

    #[error("malformed table: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
