//! Special functions for the half-plane closed forms and the ribbon kernels.
//!
//! Complex arguments use [`num_complex::Complex64`]; the branch conventions
//! follow the principal value with the cut on the negative real axis.

mod bessel;
mod elliptic;
mod struve;
mod thermal;

use num_complex::Complex64;

pub use bessel::{bessel_k, bessel_k01};
pub use elliptic::elliptic_km_em;
pub use struve::{struve_l, struve_m_asymptotic, STRUVE_ARGUMENT_CEILING};
pub use thermal::{thermal_excess, thermal_factor, THERMAL_SERIES_THRESHOLD};

/// Complex scalar used throughout the engine.
pub type ComplexScalar = Complex64;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum SpecialFunctionError {
    #[error("{function}: argument {argument} is outside the domain ({reason})")]
    Domain {
        function: &'static str,
        argument: Complex64,
        reason: &'static str,
    },
    #[error("{function}: result overflows double range at {argument}")]
    Overflow {
        function: &'static str,
        argument: Complex64,
    },
}

pub(crate) fn domain(function: &'static str, argument: Complex64, reason: &'static str) -> SpecialFunctionError {
    SpecialFunctionError::Domain {
        function,
        argument,
        reason,
    }
}

pub(crate) fn is_finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}
