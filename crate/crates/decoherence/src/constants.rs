//! Physical constants (CODATA 2018) and the thermal length scale.

use std::f64::consts::PI;

pub const FINE_STRUCTURE: f64 = 7.297_352_569_3e-3;
/// m/s
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// J·s
pub const HBAR: f64 = 1.054_571_817e-34;
/// J/K
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// λ_T = 2πħc/(k_B T) in meters.
pub fn thermal_wavelength(temperature: f64) -> f64 {
    2.0 * PI * HBAR * SPEED_OF_LIGHT / (BOLTZMANN * temperature)
}

/// Inverse of [`thermal_wavelength`].
pub fn temperature_for_wavelength(lambda_t: f64) -> f64 {
    2.0 * PI * HBAR * SPEED_OF_LIGHT / (BOLTZMANN * lambda_t)
}
