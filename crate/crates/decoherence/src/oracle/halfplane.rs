//! Dense trapezoid sums for the half-plane integrals.

use std::f64::consts::{FRAC_PI_2, PI};

use super::functions::{compensated_sum, coth_reference};
use crate::constants::FINE_STRUCTURE;
use crate::error::{Error, Result};
use crate::halfplane::{BeamParameters, Estimate, LengthUnit, PathPairGeometry, ThermalState};

fn eta_of(beta: f64) -> f64 {
    (1.0 - beta * beta).sqrt() / beta
}

fn weight(mu: f64, eta: f64) -> f64 {
    let s2 = mu * mu + eta * eta;
    (2.0 * mu * mu + eta * eta) * (1.0 - mu * mu).max(0.0).sqrt() / s2.powf(1.5)
}

/// Trapezoid sum over φ ∈ [0, π/2] of g(sin φ)·cos φ. The integrand extends to
/// a smooth periodic function for the weights used here.
fn phi_trapezoid<F: FnMut(f64) -> f64>(mut g: F, panels: usize) -> f64 {
    let h = FRAC_PI_2 / panels as f64;
    let terms = (0..=panels).map(|i| {
        let (s, c) = (i as f64 * h).sin_cos();
        let w = if i == 0 || i == panels { 0.5 } else { 1.0 };
        w * c * g(s)
    });
    compensated_sum(terms.collect::<Vec<_>>()) * h
}

/// f(β) by a dense trapezoid in φ with μ = sin φ.
pub fn brute_force_velocity_f(beta: f64, n_mu: usize) -> f64 {
    let eta = eta_of(beta);
    phi_trapezoid(|mu| weight(mu, eta), n_mu)
}

/// ∫₀¹ w(μ) dμ for a given η.
pub fn brute_force_weight_integral(eta: f64, n_mu: usize) -> f64 {
    phi_trapezoid(|mu| weight(mu, eta), n_mu)
}

/// e^{−2aθs} + e^{−2bθs} − 2e^{−(a+b)θs}cos(μθp), summed as three expm1
/// terms when the exponents are small so the O(1) parts cancel exactly.
pub fn bracket_split(theta: f64, s: f64, mu: f64, a: f64, b: f64, p: f64) -> f64 {
    let (ea, eb, em) = (2.0 * a * theta * s, 2.0 * b * theta * s, (a + b) * theta * s);
    let sn = (0.5 * mu * theta * p).sin();
    let phase = 4.0 * (-em).exp() * sn * sn;
    let sum = if em < 1.0 {
        compensated_sum([(-ea).exp_m1(), (-eb).exp_m1(), -2.0 * (-em).exp_m1()])
    } else {
        compensated_sum([(-ea).exp(), (-eb).exp(), -2.0 * (-em).exp()])
    };
    sum.max(0.0) + phase
}

/// Full (μ, θ) integrand, α/2π included; a, b, p in λ_T units, T > 0.
pub fn integrand_reference(theta: f64, mu: f64, a: f64, b: f64, p: f64, beta: f64) -> f64 {
    let eta = eta_of(beta);
    let s = (mu * mu + eta * eta).sqrt();
    FINE_STRUCTURE / (2.0 * PI) * weight(mu, eta) * coth_reference(theta) * bracket_split(theta, s, mu, a, b, p) / theta
}

/// ∫₀^∞ dθ/θ c(θ) B(θ) on a log-spaced trapezoid grid, with c = coth(θ/4π)
/// when `thermal` and 1 otherwise. The part below the grid is added from
/// the small-θ power law.
pub fn brute_force_theta_integral(mu: f64, eta: f64, a: f64, b: f64, p: f64, thermal: bool, n_theta: usize) -> f64 {
    let s = (mu * mu + eta * eta).sqrt();
    let (near, far) = (a.min(b), a.max(b));
    let lo = (1e-6 / ((near + far) * s + mu * p).max(1.0)).ln();
    let hi = (40.0 / (2.0 * near * s)).ln();
    let h = (hi - lo) / n_theta as f64;
    let g = |t: f64| {
        let theta = t.exp();
        let c = if thermal { coth_reference(theta) } else { 1.0 };
        c * bracket_split(theta, s, mu, a, b, p)
    };
    let terms: Vec<f64> = (0..=n_theta)
        .map(|i| {
            let w = if i == 0 || i == n_theta { 0.5 } else { 1.0 };
            w * g(lo + i as f64 * h)
        })
        .collect();
    // g ∝ θ (thermal) or θ² below the grid
    let tail = g(lo) / if thermal { 1.0 } else { 2.0 };
    compensated_sum(terms) * h + tail
}

fn trapezoid_probability(eta: f64, a: f64, b: f64, p: f64, thermal: bool, n_mu: usize, n_theta: usize) -> f64 {
    FINE_STRUCTURE / (2.0 * PI) * phi_trapezoid(|mu| weight(mu, eta) * brute_force_theta_integral(mu, eta, a, b, p, thermal, n_theta), n_mu)
}

/// P by dense trapezoid sums in φ and ln θ. The error estimate is the
/// Richardson difference against the grid with half as many points.
pub fn brute_force_halfplane_p(
    geom: &PathPairGeometry,
    beam: &BeamParameters,
    thermal: &ThermalState,
    n_mu: usize,
    n_theta: usize,
) -> Result<Estimate> {
    geom.validate()?;
    if n_mu < 1000 || n_theta < 1000 {
        return Err(Error::invalid("grid", n_mu.min(n_theta) as f64, "brute force needs at least 10³ points per axis"));
    }
    if geom.d1 == geom.d2 && geom.d_perp == 0.0 {
        return Ok(Estimate {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
        });
    }
    let unit = if thermal.is_zero() {
        geom.d1.min(geom.d2)
    } else {
        match geom.unit {
            LengthUnit::ThermalWavelength => 1.0,
            LengthUnit::Meters => thermal.lambda_t(),
            LengthUnit::RibbonWidth => return Err(Error::invalid("unit", f64::NAN, "half-plane lengths need meters or λ_T")),
        }
    };
    let (a, b, p) = (geom.d1 / unit, geom.d2 / unit, geom.d_perp / unit);
    let eta = beam.eta();
    let hot = !thermal.is_zero();
    let fine = trapezoid_probability(eta, a, b, p, hot, n_mu, n_theta);
    let coarse = trapezoid_probability(eta, a, b, p, hot, n_mu / 2, n_theta / 2);
    Ok(Estimate {
        value: fine,
        error_estimate: (fine - coarse).abs() / 3.0,
        evaluations: (n_mu + 1) * (n_theta + 1) + (n_mu / 2 + 1) * (n_theta / 2 + 1),
    })
}
