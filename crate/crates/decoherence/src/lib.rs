//! Radiative decoherence of a two-path free-electron beam passing a perfectly
//! conducting half-plane or a finite-width ribbon.
//!
//! The half-plane is handled through its analytic spectral kernel; the ribbon
//! through a piecewise-constant collocation boundary-element solver. Both
//! support zero and finite temperature.

pub mod special_functions;
pub mod numerics;
pub mod constants;
mod error;
pub mod halfplane;
pub mod ribbon_bem;
pub mod oracle;

pub use error::{Error, Result};
pub use halfplane::{
    decoherence_high_temperature_closed, decoherence_probability, decoherence_probability_with,
    decoherence_zero_temperature_closed, fringe_visibility, gamma_spectral, spectral_density,
    spectral_density_normalized, velocity_factor_f, BeamParameters, Estimate, HalfPlaneOptions, LengthUnit,
    PathPairGeometry, ThermalState, VelocityFactorMethod,
};
pub use ribbon_bem::{
    decoherence_probability_ribbon, decoherence_probability_ribbon_sweep, gamma_ribbon, RibbonGeometry, RibbonOptions,
    RibbonSweep,
};
