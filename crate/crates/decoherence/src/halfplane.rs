//! Two-path decoherence near a perfectly conducting half-plane.
//!
//! P = (α/2π) ∫₀¹dμ w(μ) ∫₀^∞ dθ/θ coth(θ/4π) B(θ, μ), where
//! w(μ) = (2μ²+η²)√(1−μ²)/(μ²+η²)^{3/2} and B is the three-term bracket
//! written here in the manifestly nonnegative form
//! B = 4e^{−θ(a+b)s}[sinh²(θ(b−a)s/2) + sin²(μθp/2)], s = √(μ²+η²),
//! with a, b, p the path distances in units of λ_T.

use std::cell::Cell;
use std::f64::consts::{FRAC_PI_2, PI};
use std::str::FromStr;

use crate::constants::{thermal_wavelength, temperature_for_wavelength, FINE_STRUCTURE, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::numerics::{integrate_adaptive_with, QuadratureError, QuadratureOptions};
use crate::special_functions::{elliptic_km_em, thermal_excess, thermal_factor};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamParameters {
    beta: f64,
    gamma: f64,
    eta: f64,
}

impl BeamParameters {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::invalid("beta", beta, "electron speed must satisfy 0 < v/c < 1"));
        }
        let root = ((1.0 - beta) * (1.0 + beta)).sqrt();
        Ok(Self {
            beta,
            gamma: 1.0 / root,
            eta: root / beta,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// η = 1/(βγ)
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// (1 − 1/γ)/β², evaluated as γ/(γ+1).
    pub fn velocity_prefactor(&self) -> f64 {
        self.gamma / (self.gamma + 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LengthUnit {
    ThermalWavelength,
    Meters,
    RibbonWidth,
}

impl LengthUnit {
    pub fn label(&self) -> &'static str {
        match self {
            LengthUnit::ThermalWavelength => "lambda_T",
            LengthUnit::Meters => "m",
            LengthUnit::RibbonWidth => "W",
        }
    }
}

impl FromStr for LengthUnit {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "lambda_T" | "lambda_t" | "thermal_wavelength" => Ok(LengthUnit::ThermalWavelength),
            "m" | "meters" => Ok(LengthUnit::Meters),
            "W" | "w" | "ribbon_width" => Ok(LengthUnit::RibbonWidth),
            other => Err(format!("unknown length unit '{other}' (expected lambda_T, m or W)")),
        }
    }
}

/// Two straight electron paths crossing the plane of the conductor.
/// `d1`, `d2` are distances from the edge, `d_perp` the offset along it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPairGeometry {
    pub d1: f64,
    pub d2: f64,
    pub d_perp: f64,
    pub unit: LengthUnit,
}

impl PathPairGeometry {
    pub fn new(d1: f64, d2: f64, d_perp: f64, unit: LengthUnit) -> Result<Self> {
        let g = Self { d1, d2, d_perp, unit };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("d1", self.d1), ("d2", self.d2)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, v, "paths must lie outside the conductor (d > 0)"));
            }
        }
        if !(self.d_perp >= 0.0 && self.d_perp.is_finite()) {
            return Err(Error::invalid("d_perp", self.d_perp, "must be finite and ≥ 0"));
        }
        Ok(())
    }

    pub fn swapped(&self) -> Self {
        Self {
            d1: self.d2,
            d2: self.d1,
            ..*self
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            d1: self.d1 * s,
            d2: self.d2 * s,
            d_perp: self.d_perp * s,
            unit: self.unit,
        }
    }

    pub fn coincident(&self) -> bool {
        self.d1 == self.d2 && self.d_perp == 0.0
    }

    pub(crate) fn nearest(&self) -> f64 {
        self.d1.min(self.d2)
    }
}

/// Temperature of the photon bath; T = 0 carries λ_T = ∞.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalState {
    temperature: f64,
    lambda_t: f64,
}

impl ThermalState {
    pub fn zero() -> Self {
        Self {
            temperature: 0.0,
            lambda_t: f64::INFINITY,
        }
    }

    pub fn from_kelvin(temperature: f64) -> Result<Self> {
        if temperature == 0.0 {
            return Ok(Self::zero());
        }
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::invalid("temperature", temperature, "must be finite and ≥ 0 K"));
        }
        Ok(Self {
            temperature,
            lambda_t: thermal_wavelength(temperature),
        })
    }

    /// Thermal state whose λ_T equals `lambda_t` meters.
    pub fn from_wavelength(lambda_t: f64) -> Result<Self> {
        if !(lambda_t > 0.0 && lambda_t.is_finite()) {
            return Err(Error::invalid("lambda_T", lambda_t, "must be finite and > 0"));
        }
        Ok(Self {
            temperature: temperature_for_wavelength(lambda_t),
            lambda_t,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.temperature == 0.0
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// Meters; infinite at T = 0.
    pub fn lambda_t(&self) -> f64 {
        self.lambda_t
    }

    pub fn doubled(&self) -> Self {
        if self.is_zero() {
            *self
        } else {
            Self {
                temperature: 2.0 * self.temperature,
                lambda_t: 0.5 * self.lambda_t,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VelocityFactorMethod {
    ClosedForm,
    Quadrature,
}

/// Quadrature settings for the half-plane double integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlaneOptions {
    pub rel_tol: f64,
}

impl Default for HalfPlaneOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-9 }
    }
}

/// Value with the outer quadrature error estimate and total integrand calls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

impl Estimate {
    fn exact(value: f64) -> Self {
        Self {
            value,
            error_estimate: 0.0,
            evaluations: 0,
        }
    }
}

/// w(μ)
pub fn mu_weight(mu: f64, eta: f64) -> f64 {
    let m2 = mu * mu;
    let s2 = m2 + eta * eta;
    (2.0 * m2 + eta * eta) * (1.0 - m2).max(0.0).sqrt() / (s2 * s2.sqrt())
}

/// w(sin φ)·cos φ, the μ weight after μ = sin φ.
fn phi_weight(phi: f64, eta: f64) -> (f64, f64) {
    let (mu, c) = phi.sin_cos();
    let m2 = mu * mu;
    let s2 = m2 + eta * eta;
    (mu, (2.0 * m2 + eta * eta) * c * c / (s2 * s2.sqrt()))
}

/// 4e^{−t(a+b)s}[sinh²(t|b−a|s/2) + sin²(μtp/2)] without overflow or cancellation.
pub(crate) fn bracket(t: f64, s: f64, mu: f64, a: f64, b: f64, p: f64) -> f64 {
    let m = t * (a + b) * s;
    let delta = t * (b - a).abs() * s;
    let grow = if delta > 0.0 {
        let one_minus = -(-delta).exp_m1();
        (delta - m).exp() * one_minus * one_minus
    } else {
        0.0
    };
    let phase = if p > 0.0 && mu > 0.0 {
        let sn = (0.5 * mu * t * p).sin();
        4.0 * (-m).exp() * sn * sn
    } else {
        0.0
    };
    grow + phase
}

/// Velocity factor f(β) = ∫₀¹ w(μ) dμ.
pub fn velocity_factor_f(beam: &BeamParameters, method: VelocityFactorMethod) -> Result<f64> {
    match method {
        VelocityFactorMethod::ClosedForm => {
            let bg = beam.beta * beam.gamma;
            let (k, e) = elliptic_km_em(-bg * bg)?;
            Ok(beam.eta * ((2.0 * beam.gamma * beam.gamma + 1.0) * k - 3.0 * e))
        }
        VelocityFactorMethod::Quadrature => {
            let eta = beam.eta;
            let r = integrate_adaptive_with(
                |phi| Ok::<f64, QuadratureError>(phi_weight(phi, eta).1),
                0.0,
                FRAC_PI_2,
                QuadratureOptions::new(1e-14, 1e-300),
                &[],
            )?;
            Ok(r.value)
        }
    }
}

/// Lengths of a path pair expressed in the internal unit.
#[derive(Debug, Clone, Copy)]
struct Scaled {
    a: f64,
    b: f64,
    p: f64,
}

impl Scaled {
    /// Ratios to the nearer path; exchange-symmetric by construction.
    fn relative(g: &PathPairGeometry) -> Self {
        let near = g.nearest();
        let far = g.d1.max(g.d2);
        Self {
            a: 1.0,
            b: far / near,
            p: g.d_perp / near,
        }
    }

    fn divided(g: &PathPairGeometry, scale: f64) -> Self {
        Self {
            a: g.d1.min(g.d2) / scale,
            b: g.d1.max(g.d2) / scale,
            p: g.d_perp / scale,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ThetaWeight {
    Vacuum,
    ThermalExcess,
}

/// ∫₀^∞ dθ/θ K(θ) B(θ, μ) in the variable ln θ.
fn theta_integral(mu: f64, s: f64, g: Scaled, weight: ThetaWeight, rel_tol: f64, calls: &Cell<usize>) -> Result<f64> {
    let mut rate = 2.0 * g.a * s;
    if weight == ThetaWeight::ThermalExcess {
        rate += 1.0 / (2.0 * PI);
    }
    let onset = (g.a + g.b) * s + mu * g.p;
    let lo = (1e-12 / onset).ln();
    let hi = (1.5 * (1.0 / rel_tol).ln().max(1.0) * 1.2 / rate).ln();
    if !(hi > lo) {
        return Ok(0.0);
    }
    let r = integrate_adaptive_with(
        |u: f64| -> Result<f64> {
            let theta = u.exp();
            let b = bracket(theta, s, mu, g.a, g.b, g.p);
            Ok(match weight {
                ThetaWeight::Vacuum => b,
                ThetaWeight::ThermalExcess => {
                    if b == 0.0 {
                        0.0
                    } else {
                        thermal_excess(theta)? * b
                    }
                }
            })
        },
        lo,
        hi,
        QuadratureOptions::new(rel_tol, 1e-300),
        &[],
    )?;
    calls.set(calls.get() + r.evaluations);
    Ok(r.value)
}

/// The θ integral at coth = 1 in closed form (Frullani):
/// ∫dθ/θ B = ln[((a+b)²s² + μ²p²)/(4abs²)].
fn vacuum_theta_integral(mu: f64, s: f64, g: Scaled) -> f64 {
    let diff = (g.b - g.a) * s;
    let phase = mu * g.p;
    ((diff * diff + phase * phase) / (4.0 * g.a * g.b * s * s)).ln_1p()
}

fn mu_integral(beam: &BeamParameters, g: Scaled, weight: ThetaWeight, opts: HalfPlaneOptions) -> Result<Estimate> {
    let calls = Cell::new(0);
    let eta = beam.eta;
    let inner_tol = opts.rel_tol * 0.1;
    let r = integrate_adaptive_with(
        |phi: f64| -> Result<f64> {
            let (mu, w) = phi_weight(phi, eta);
            if w == 0.0 {
                return Ok(0.0);
            }
            let s = (mu * mu + eta * eta).sqrt();
            let inner = match weight {
                ThetaWeight::Vacuum => vacuum_theta_integral(mu, s, g),
                ThetaWeight::ThermalExcess => theta_integral(mu, s, g, weight, inner_tol, &calls)?,
            };
            Ok(w * inner)
        },
        0.0,
        FRAC_PI_2,
        QuadratureOptions::new(opts.rel_tol, 1e-300),
        &[],
    )?;
    let pre = FINE_STRUCTURE / (2.0 * PI);
    Ok(Estimate {
        value: pre * r.value,
        error_estimate: pre * r.error_estimate,
        evaluations: calls.get() + r.evaluations,
    })
}

/// Full integrand of the (μ, θ) double integral, α/2π included; geometry in λ_T units.
pub fn decoherence_integrand(theta: f64, mu: f64, geom: &PathPairGeometry, beam: &BeamParameters) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(Error::invalid("theta", theta, "must be > 0"));
    }
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::invalid("mu", mu, "must lie in [0, 1]"));
    }
    geom.validate()?;
    if geom.unit != LengthUnit::ThermalWavelength {
        return Err(Error::invalid("unit", f64::NAN, "the integrand takes lengths in λ_T units"));
    }
    let s = (mu * mu + beam.eta * beam.eta).sqrt();
    let b = bracket(theta, s, mu, geom.d1, geom.d2, geom.d_perp);
    Ok(FINE_STRUCTURE / (2.0 * PI) * mu_weight(mu, beam.eta) * thermal_factor(theta)? * b / theta)
}

/// Converts the geometry to λ_T units for T > 0.
fn thermal_units(geom: &PathPairGeometry, thermal: &ThermalState) -> Result<Scaled> {
    match geom.unit {
        LengthUnit::ThermalWavelength => Ok(Scaled::divided(geom, 1.0)),
        LengthUnit::Meters => Ok(Scaled::divided(geom, thermal.lambda_t())),
        LengthUnit::RibbonWidth => Err(Error::invalid(
            "unit",
            f64::NAN,
            "ribbon-width units have no meaning for the half-plane",
        )),
    }
    .and_then(|s| {
        if thermal.is_zero() {
            Err(Error::invalid("temperature", 0.0, "λ_T units need a finite temperature"))
        } else {
            Ok(s)
        }
    })
}

/// Decoherence probability P of the path pair.
pub fn decoherence_probability(geom: &PathPairGeometry, beam: &BeamParameters, thermal: &ThermalState) -> Result<f64> {
    Ok(decoherence_probability_with(geom, beam, thermal, HalfPlaneOptions::default())?.value)
}

/// [`decoherence_probability`] with explicit tolerance and diagnostics.
///
/// For T > 0 the result is P(T=0) + (α/2π)∫w∫dθ/θ (coth − 1)B; the first
/// term is computed from length ratios only and is bitwise independent of T.
pub fn decoherence_probability_with(
    geom: &PathPairGeometry,
    beam: &BeamParameters,
    thermal: &ThermalState,
    opts: HalfPlaneOptions,
) -> Result<Estimate> {
    geom.validate()?;
    if geom.unit == LengthUnit::RibbonWidth {
        return Err(Error::invalid("unit", f64::NAN, "ribbon-width units have no meaning for the half-plane"));
    }
    if thermal.is_zero() && geom.unit == LengthUnit::ThermalWavelength {
        return Err(Error::invalid("temperature", 0.0, "λ_T units need a finite temperature"));
    }
    if geom.coincident() {
        return Ok(Estimate::exact(0.0));
    }
    let vacuum = mu_integral(beam, Scaled::relative(geom), ThetaWeight::Vacuum, opts)?;
    if thermal.is_zero() {
        return Ok(vacuum);
    }
    let excess = mu_integral(beam, thermal_units(geom, thermal)?, ThetaWeight::ThermalExcess, opts)?;
    Ok(Estimate {
        value: vacuum.value + excess.value,
        error_estimate: vacuum.error_estimate + excess.error_estimate,
        evaluations: vacuum.evaluations + excess.evaluations,
    })
}

/// Zero-temperature closed form (α/2π) f(β) ln[(d₁+d₂)²/(4d₁d₂)].
pub fn decoherence_zero_temperature_closed(geom: &PathPairGeometry, beam: &BeamParameters) -> Result<f64> {
    geom.validate()?;
    if geom.d_perp != 0.0 {
        return Err(Error::invalid("d_perp", geom.d_perp, "the closed form requires d_perp = 0"));
    }
    let f = velocity_factor_f(beam, VelocityFactorMethod::ClosedForm)?;
    let diff = geom.d1 - geom.d2;
    let log = (diff * diff / (4.0 * geom.d1 * geom.d2)).ln_1p();
    Ok(FINE_STRUCTURE / (2.0 * PI) * f * log)
}

/// High-temperature closed form
/// 2πα (1−1/γ)/β² [(d₁/λ_T) ln(2d₁/(d₁+d₂)) + (d₂/λ_T) ln(2d₂/(d₁+d₂))].
pub fn decoherence_high_temperature_closed(
    geom: &PathPairGeometry,
    beam: &BeamParameters,
    thermal: &ThermalState,
) -> Result<f64> {
    geom.validate()?;
    if geom.d_perp != 0.0 {
        return Err(Error::invalid("d_perp", geom.d_perp, "the closed form requires d_perp = 0"));
    }
    if thermal.is_zero() {
        return Err(Error::invalid("temperature", 0.0, "the high-temperature form needs T > 0"));
    }
    let g = thermal_units(geom, thermal)?;
    let sum = g.a + g.b;
    let bracket = g.a * (2.0 * g.a / sum).ln() + g.b * (2.0 * g.b / sum).ln();
    Ok(2.0 * PI * FINE_STRUCTURE * beam.velocity_prefactor() * bracket)
}

fn require_meters(geom: &PathPairGeometry, thermal: &ThermalState) -> Result<PathPairGeometry> {
    geom.validate()?;
    match geom.unit {
        LengthUnit::Meters => Ok(*geom),
        LengthUnit::ThermalWavelength if !thermal.is_zero() => {
            let mut g = geom.scaled(thermal.lambda_t());
            g.unit = LengthUnit::Meters;
            Ok(g)
        }
        _ => Err(Error::invalid("unit", f64::NAN, "spectral quantities need absolute lengths")),
    }
}

/// Generalized loss probability Γ(R₁, R₂, ω) in seconds (per unit ω);
/// geometry in meters, ω in rad/s.
pub fn gamma_spectral(geom: &PathPairGeometry, beam: &BeamParameters, omega: f64) -> Result<f64> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::invalid("omega", omega, "must be finite and > 0"));
    }
    let g = require_meters(geom, &ThermalState::zero())?;
    let k = omega / SPEED_OF_LIGHT;
    let eta = beam.eta;
    let r = integrate_adaptive_with(
        |phi: f64| -> Result<f64> {
            let (mu, w) = phi_weight(phi, eta);
            let s = (mu * mu + eta * eta).sqrt();
            Ok(w * (mu * k * g.d_perp).cos() * (-k * (g.d1 + g.d2) * s).exp())
        },
        0.0,
        FRAC_PI_2,
        QuadratureOptions::new(1e-12, 1e-300),
        &[],
    )?;
    Ok(FINE_STRUCTURE / (PI * omega) * r.value)
}

/// ∫₀¹ w(μ) B(k; x₁, x₂, y) dμ for dimensionless lengths k·x.
fn spectral_bracket(beam: &BeamParameters, k: f64, g: Scaled) -> Result<f64> {
    let eta = beam.eta;
    let r = integrate_adaptive_with(
        |phi: f64| -> Result<f64> {
            let (mu, w) = phi_weight(phi, eta);
            let s = (mu * mu + eta * eta).sqrt();
            Ok(w * bracket(k, s, mu, g.a, g.b, g.p))
        },
        0.0,
        FRAC_PI_2,
        QuadratureOptions::new(1e-12, 1e-300),
        &[],
    )?;
    Ok(r.value)
}

/// dP/dω = ½ coth(θ/4π) [Γ₁₁ + Γ₂₂ − 2Γ₁₂] in seconds; geometry in meters.
pub fn spectral_density(
    geom: &PathPairGeometry,
    beam: &BeamParameters,
    thermal: &ThermalState,
    omega: f64,
) -> Result<f64> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::invalid("omega", omega, "must be finite and > 0"));
    }
    let g = require_meters(geom, thermal)?;
    if g.coincident() {
        return Ok(0.0);
    }
    let k = omega / SPEED_OF_LIGHT;
    let coth = if thermal.is_zero() {
        1.0
    } else {
        thermal_factor(k * thermal.lambda_t())?
    };
    let inner = spectral_bracket(beam, k, Scaled::divided(&g, 1.0))?;
    Ok(0.5 * coth * FINE_STRUCTURE / (PI * omega) * inner)
}

/// dP/dΩ with Ω = ωd₁/c; unit-free at T = 0. For T > 0 the geometry must
/// carry meters or λ_T units so that θ = Ω λ_T/d₁ can be formed.
pub fn spectral_density_normalized(
    geom: &PathPairGeometry,
    beam: &BeamParameters,
    thermal: &ThermalState,
    omega_d1_over_c: f64,
) -> Result<f64> {
    geom.validate()?;
    let big_omega = omega_d1_over_c;
    if !(big_omega > 0.0 && big_omega.is_finite()) {
        return Err(Error::invalid("omega_d1_over_c", big_omega, "must be finite and > 0"));
    }
    if geom.coincident() {
        return Ok(0.0);
    }
    let coth = if thermal.is_zero() {
        1.0
    } else {
        let d1_in_lambda = match geom.unit {
            LengthUnit::ThermalWavelength => geom.d1,
            LengthUnit::Meters => geom.d1 / thermal.lambda_t(),
            LengthUnit::RibbonWidth => {
                return Err(Error::invalid("unit", f64::NAN, "ribbon-width units have no meaning for the half-plane"))
            }
        };
        thermal_factor(big_omega / d1_in_lambda)?
    };
    let g = Scaled {
        a: 1.0,
        b: geom.d2 / geom.d1,
        p: geom.d_perp / geom.d1,
    };
    let inner = spectral_bracket(beam, big_omega, g)?;
    Ok(0.5 * coth * FINE_STRUCTURE / (PI * big_omega) * inner)
}

/// Interference intensity 1 + e^{−P} cos(2πΔx/period + χ) on the given grid.
pub fn fringe_visibility(p: f64, chi: f64, delta_x_grid: &[f64], period: f64) -> Result<Vec<f64>> {
    if !(p >= 0.0) {
        return Err(Error::invalid("P", p, "must be ≥ 0"));
    }
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::invalid("period", period, "must be finite and > 0"));
    }
    let contrast = (-p).exp();
    Ok(delta_x_grid
        .iter()
        .map(|&x| 1.0 + contrast * (2.0 * PI * x / period + chi).cos())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracket_small_argument_keeps_digits() {
        let (t, s, a, b): (f64, f64, f64, f64) = (1e-8, 1.2, 0.1, 0.2);
        let direct = 4.0 * (-t * (a + b) * s).exp() * (t * (b - a) * s / 2.0).sinh().powi(2);
        let got = bracket(t, s, 0.0, a, b, 0.0);
        assert!((got - direct).abs() / direct < 1e-12);
    }

    #[test]
    fn bracket_does_not_overflow() {
        let v = bracket(1e4, 2.0, 0.5, 50.0, 200.0, 0.0);
        assert!(v.is_finite() && v >= 0.0);
    }
}
