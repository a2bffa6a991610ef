use num_complex::Complex64;
use std::f64::consts::PI;

use super::{domain, SpecialFunctionError};

/// Below this θ the thermal factor uses its two-term Laurent form.
pub const THERMAL_SERIES_THRESHOLD: f64 = 1.0e-4;

/// coth(θ/4π) = 2n_T + 1 for θ = ħω·2π/(k_B T).
pub fn thermal_factor(theta: f64) -> Result<f64, SpecialFunctionError> {
    check(theta)?;
    if theta < THERMAL_SERIES_THRESHOLD {
        return Ok(4.0 * PI / theta + theta / (12.0 * PI));
    }
    Ok(1.0 + 2.0 / (theta / (2.0 * PI)).exp_m1())
}

/// coth(θ/4π) − 1 = 2n_T without cancellation.
pub fn thermal_excess(theta: f64) -> Result<f64, SpecialFunctionError> {
    check(theta)?;
    Ok(2.0 / (theta / (2.0 * PI)).exp_m1())
}

fn check(theta: f64) -> Result<(), SpecialFunctionError> {
    if theta > 0.0 {
        Ok(())
    } else {
        Err(domain("thermal_factor", Complex64::new(theta, 0.0), "θ must be positive"))
    }
}
