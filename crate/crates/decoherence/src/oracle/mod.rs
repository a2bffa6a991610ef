//! Brute-force reference implementations.
//!
//! Nothing here calls the production kernels. Special functions come from
//! their series or integral definitions, and every integral is a dense
//! trapezoid or Simpson sum, so expect these to be slow.

mod edge;
mod functions;
mod halfplane;
mod panel;
mod regression;

pub use edge::{half_plane_kernels, HalfPlaneKernels};
pub use functions::{
    bessel_k_integral, bessel_k_reference, bessel_k_series, compensated_sum, coth_direct, coth_laurent, coth_reference,
    elliptic_reference, struve_l0_integral, struve_l_series,
};
pub use halfplane::{
    brute_force_halfplane_p, brute_force_theta_integral, brute_force_velocity_f, brute_force_weight_integral,
    bracket_split, integrand_reference,
};
pub use panel::{brute_force_panel_integral, self_panel_second_derivative};
pub use regression::{regression_table, run_regression, Measure, OracleReport, RegressionCase};
