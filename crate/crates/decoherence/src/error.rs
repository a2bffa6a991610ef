use crate::numerics::{LinalgError, QuadratureError};
use crate::special_functions::SpecialFunctionError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error(transparent)]
    SpecialFunction(#[from] SpecialFunctionError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("collocation residual {residual:e} exceeds {limit:e} at kW = {k_w}, k_y/k = {mu}")]
    Residual {
        residual: f64,
        limit: f64,
        k_w: f64,
        mu: f64,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter { name, value, reason }
    }

    /// Numerical failure rather than bad input.
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            Error::InvalidParameter { .. } | Error::SpecialFunction(SpecialFunctionError::Domain { .. })
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
