//! The pinned production-versus-oracle table.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use super::edge::half_plane_kernels;
use super::functions::{
    bessel_k_integral, bessel_k_reference, coth_direct, coth_laurent, elliptic_reference, struve_l0_integral,
    struve_l_series,
};
use super::halfplane::{
    brute_force_halfplane_p, brute_force_theta_integral, brute_force_velocity_f, brute_force_weight_integral,
    integrand_reference,
};
use super::panel::{brute_force_panel_integral, self_panel_second_derivative};
use crate::constants::{FINE_STRUCTURE, SPEED_OF_LIGHT};
use crate::error::Result;
use crate::halfplane::{
    decoherence_high_temperature_closed, decoherence_integrand, decoherence_probability, decoherence_zero_temperature_closed,
    fringe_visibility, gamma_spectral, mu_weight, spectral_density, spectral_density_normalized, velocity_factor_f,
    BeamParameters, LengthUnit, PathPairGeometry, ThermalState, VelocityFactorMethod,
};
use crate::numerics::{integrate_adaptive, integrate_semi_infinite, solve_dense, DenseComplexSystem};
use crate::ribbon_bem::{
    assemble_system, decoherence_probability_ribbon_sweep, gamma_ribbon, interval_primitive, projected_current,
    solve_induced_current, RibbonGeometry, RibbonOptions, WaveContext,
};
use crate::special_functions::{bessel_k, elliptic_km_em, struve_l, thermal_factor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Relative,
    Absolute,
}

impl Measure {
    pub fn label(self) -> &'static str {
        match self {
            Measure::Relative => "relative",
            Measure::Absolute => "absolute",
        }
    }
}

/// One production/oracle comparison. The deviation is kept even when the
/// row fails; a production error shows up as NaN with infinite deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub quantity: String,
    pub production: f64,
    pub oracle: f64,
    pub deviation: f64,
    pub tolerance: f64,
    pub measure: Measure,
    pub resolution: String,
}

impl OracleReport {
    pub fn new(quantity: impl Into<String>, production: f64, oracle: f64, tolerance: f64, measure: Measure, resolution: impl Into<String>) -> Self {
        let diff = (production - oracle).abs();
        let deviation = match measure {
            Measure::Absolute => diff,
            Measure::Relative if oracle != 0.0 => diff / oracle.abs(),
            Measure::Relative => diff,
        };
        Self {
            quantity: quantity.into(),
            production,
            oracle,
            deviation: if deviation.is_nan() { f64::INFINITY } else { deviation },
            tolerance,
            measure,
            resolution: resolution.into(),
        }
    }

    /// Complex values are compared by |p − o|/|o| and reported by modulus.
    fn complex(quantity: impl Into<String>, production: Complex64, oracle: Complex64, tolerance: f64, resolution: impl Into<String>) -> Self {
        let mut r = Self::new(quantity, production.norm(), oracle.norm(), tolerance, Measure::Relative, resolution);
        let d = (production - oracle).norm() / oracle.norm();
        r.deviation = if d.is_nan() { f64::INFINITY } else { d };
        r
    }

    fn from_result(quantity: &str, production: Result<f64>, oracle: f64, tolerance: f64, measure: Measure, resolution: impl Into<String>) -> Self {
        Self::new(quantity, production.unwrap_or(f64::NAN), oracle, tolerance, measure, resolution)
    }

    pub fn passed(&self) -> bool {
        self.deviation <= self.tolerance
    }
}

/// A named group of rows; `run` may take minutes for the ribbon groups.
#[derive(Clone, Copy)]
pub struct RegressionCase {
    pub name: &'static str,
    pub run: fn() -> Vec<OracleReport>,
}

pub fn regression_table() -> Vec<RegressionCase> {
    vec![
        RegressionCase { name: "special_functions", run: special_functions },
        RegressionCase { name: "quadrature", run: quadrature },
        RegressionCase { name: "dense_solver", run: dense_solver },
        RegressionCase { name: "velocity_factor", run: velocity_factor },
        RegressionCase { name: "halfplane_integrand", run: halfplane_integrand },
        RegressionCase { name: "halfplane_probability", run: halfplane_probability },
        RegressionCase { name: "halfplane_brute_force", run: halfplane_brute_force },
        RegressionCase { name: "spectral_density", run: spectral },
        RegressionCase { name: "panel_integrals", run: panel_integrals },
        RegressionCase { name: "ribbon_solver", run: ribbon_solver },
        RegressionCase { name: "ribbon_gamma", run: ribbon_gamma },
        RegressionCase { name: "ribbon_probability", run: ribbon_probability },
    ]
}

pub fn run_regression() -> Vec<OracleReport> {
    regression_table().iter().flat_map(|c| (c.run)()).collect()
}

/// SplitMix64, for reproducible parameter draws.
struct Draws(u64);

impl Draws {
    fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        ((z ^ (z >> 31)) >> 11) as f64 / (1u64 << 53) as f64
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    fn log_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.uniform(lo.ln(), hi.ln()).exp()
    }
}

fn beam(beta: f64) -> BeamParameters {
    BeamParameters::new(beta).expect("valid speed")
}

fn lambda_pair(d1: f64, d2: f64, d_perp: f64) -> PathPairGeometry {
    PathPairGeometry::new(d1, d2, d_perp, LengthUnit::ThermalWavelength).expect("valid geometry")
}

fn one_kelvin_scale() -> ThermalState {
    ThermalState::from_wavelength(1.0).expect("valid wavelength")
}

fn special_functions() -> Vec<OracleReport> {
    let one = Complex64::new(1.0, 0.0);
    let mut rows = vec![OracleReport::complex(
        "bessel_k0(1)",
        bessel_k(0, one).unwrap_or(Complex64::new(f64::NAN, 0.0)),
        bessel_k_integral(0, one, 20_000),
        1e-12,
        "trapezoid in t, 2e4 panels",
    )];
    for (re, im) in [(0.0, -3.0), (0.0, -12.0), (4.0, 0.0)] {
        let z = Complex64::new(re, im);
        for order in [0u8, 1] {
            rows.push(OracleReport::complex(
                format!("bessel_k{order}({re}{im:+}i)"),
                bessel_k(order as i32, z).unwrap_or(Complex64::new(f64::NAN, 0.0)),
                bessel_k_reference(order, z),
                if re == 0.0 { 1e-9 } else { 1e-12 },
                "ascending series or trapezoid",
            ));
        }
    }
    let zero = Complex64::new(0.0, 0.0);
    rows.push(OracleReport::complex(
        "struve_l-1(0)",
        struve_l(-1, zero).unwrap_or(Complex64::new(f64::NAN, 0.0)),
        struve_l_series(-1, zero, 50),
        1e-15,
        "50-term series",
    ));
    rows.push(OracleReport::new(
        "struve_l0(2)",
        struve_l(0, Complex64::new(2.0, 0.0)).map(|z| z.re).unwrap_or(f64::NAN),
        struve_l0_integral(2.0, 100_000),
        1e-9,
        Measure::Relative,
        "Simpson on the sinh representation, 1e5 panels",
    ));
    for x in [Complex64::new(0.0, -7.0), Complex64::new(0.0, -14.0), Complex64::new(10.0, 0.0)] {
        for order in [-1, 0] {
            rows.push(OracleReport::complex(
                format!("struve_l{order}({}{:+}i)", x.re, x.im),
                struve_l(order, x).unwrap_or(Complex64::new(f64::NAN, 0.0)),
                struve_l_series(order, x, 200),
                1e-9,
                "200-term series",
            ));
        }
    }
    for m in [-1.0, -3.0, -0.25] {
        let (k, e) = elliptic_reference(m, 4000);
        let got = elliptic_km_em(m).unwrap_or((f64::NAN, f64::NAN));
        rows.push(OracleReport::new(format!("elliptic_k({m})"), got.0, k, 1e-13, Measure::Relative, "trapezoid, 4000 panels"));
        rows.push(OracleReport::new(format!("elliptic_e({m})"), got.1, e, 1e-13, Measure::Relative, "trapezoid, 4000 panels"));
    }
    // K(−n) = K(n/(1+n))/√(1+n), E(−n) = √(1+n) E(n/(1+n)) map m = −3 and
    // m = −1/3 onto the complementary pair 3/4, 1/4.
    let legendre = elliptic_km_em(-3.0).and_then(|(k3, e3)| {
        let (k13, e13) = elliptic_km_em(-1.0 / 3.0)?;
        let r = (4.0f64 / 3.0).sqrt();
        let (k, e) = (2.0 * k3, e3 / 2.0);
        let (kc, ec) = (r * k13, e13 / r);
        Ok(k * ec + kc * e - k * kc)
    });
    rows.push(OracleReport::new(
        "legendre_relation(-3)",
        legendre.unwrap_or(f64::NAN),
        FRAC_PI_2,
        1e-12,
        Measure::Relative,
        "identity",
    ));
    let theta_two = 4.0 * PI * 0.5f64.atanh();
    rows.push(OracleReport::new(
        "thermal_factor(4pi atanh(1/2))",
        thermal_factor(theta_two).unwrap_or(f64::NAN),
        coth_direct(theta_two),
        1e-13,
        Measure::Relative,
        "cosh/sinh",
    ));
    rows.push(OracleReport::new(
        "thermal_factor(1e-6)",
        thermal_factor(1e-6).unwrap_or(f64::NAN),
        coth_laurent(1e-6),
        1e-9,
        Measure::Relative,
        "Laurent series to x^7",
    ));
    rows
}

fn quadrature() -> Vec<OracleReport> {
    let production = integrate_adaptive(|mu| mu_weight(mu, 1.0), 0.0, 1.0, 1e-12, 1e-14, &[]).map(|r| r.value);
    let mut rows = vec![OracleReport::new(
        "mu_integral(eta=1)",
        production.unwrap_or(f64::NAN),
        brute_force_weight_integral(1.0, 1_000_000),
        1e-8,
        Measure::Relative,
        "trapezoid in phi, 1e6 panels",
    )];
    let (a, b, mu, eta) = (0.1, 0.5, 0.3, 1.0);
    let s = f64::hypot(mu, eta);
    let production = integrate_semi_infinite(
        |t| {
            let coth = thermal_factor(t).unwrap_or(f64::NAN);
            let e = |x: f64| (-x * t * s).exp();
            coth * (e(2.0 * a) + e(2.0 * b) - 2.0 * e(a + b)) / t
        },
        0.0,
        1.0 / (2.0 * a * s),
        1e-10,
    )
    .map(|r| r.value);
    rows.push(OracleReport::new(
        "theta_integral(a=0.1,b=0.5,mu=0.3,eta=1)",
        production.unwrap_or(f64::NAN),
        brute_force_theta_integral(mu, eta, a, b, 0.0, true, 200_000),
        1e-7,
        Measure::Relative,
        "log-spaced trapezoid, 2e5 panels",
    ));
    rows
}

fn dense_solver() -> Vec<OracleReport> {
    let n = 64;
    let mut draws = Draws(64);
    let mut matrix = vec![Complex64::new(0.0, 0.0); n * n];
    for (i, m) in matrix.iter_mut().enumerate() {
        *m = Complex64::new(draws.uniform(-1.0, 1.0), draws.uniform(-1.0, 1.0));
        if i / n == i % n {
            *m += 2.0 * n as f64;
        }
    }
    let x: Vec<Complex64> = (0..n).map(|_| Complex64::new(draws.uniform(-1.0, 1.0), draws.uniform(-1.0, 1.0))).collect();
    let b: Vec<Complex64> = (0..n).map(|i| (0..n).map(|j| matrix[i * n + j] * x[j]).sum()).collect();
    let residual = DenseComplexSystem::new(n, matrix.clone(), vec![b.clone()])
        .and_then(|s| solve_dense(&s))
        .map(|sol| {
            let y = &sol[0];
            let norm_a = (0..n).map(|i| (0..n).map(|j| matrix[i * n + j].norm()).sum::<f64>()).fold(0.0, f64::max);
            let norm_y = y.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let r = (0..n)
                .map(|i| ((0..n).map(|j| matrix[i * n + j] * y[j]).sum::<Complex64>() - b[i]).norm())
                .fold(0.0, f64::max);
            r / (norm_a * norm_y)
        })
        .unwrap_or(f64::NAN);
    vec![OracleReport::new("dense_solve_residual(64)", residual, 0.0, 1e-12, Measure::Absolute, "constructed b = A x")]
}

fn velocity_factor() -> Vec<OracleReport> {
    let mut rows = Vec::new();
    for (beta, tol) in [(0.5, 1e-9), (0.9, 1e-9), (std::f64::consts::FRAC_1_SQRT_2, 1e-10)] {
        let oracle = brute_force_velocity_f(beta, 1_000_000);
        for method in [VelocityFactorMethod::ClosedForm, VelocityFactorMethod::Quadrature] {
            rows.push(OracleReport::from_result(
                &format!("velocity_f({beta:.6},{method:?})"),
                velocity_factor_f(&beam(beta), method),
                oracle,
                tol,
                Measure::Relative,
                "trapezoid in phi, 1e6 panels",
            ));
        }
    }
    rows
}

fn halfplane_integrand() -> Vec<OracleReport> {
    let mut draws = Draws(194);
    let mut worst = 0.0f64;
    let mut negative = 0usize;
    for _ in 0..200 {
        let (a, b, p) = (draws.log_uniform(1e-2, 10.0), draws.log_uniform(1e-2, 10.0), draws.log_uniform(1e-3, 10.0));
        let (theta, mu, beta) = (draws.log_uniform(1e-6, 1e2), draws.uniform(0.0, 1.0), draws.uniform(0.05, 0.99));
        let got = decoherence_integrand(theta, mu, &lambda_pair(a, b, p), &beam(beta)).unwrap_or(f64::NAN);
        let want = integrand_reference(theta, mu, a, b, p, beta);
        if !(got >= 0.0) {
            negative += 1;
        }
        if want > 1e-300 {
            worst = worst.max((got - want).abs() / want);
        }
    }
    let theta = 1e-8;
    vec![
        OracleReport::new("integrand_random_grid_max_deviation", worst, 0.0, 1e-6, Measure::Absolute, "200 draws, d_perp > 0"),
        OracleReport::new("integrand_random_grid_negative_count", negative as f64, 0.0, 0.0, Measure::Absolute, "200 draws"),
        OracleReport::from_result(
            "integrand(theta=1e-8,a=0.1,b=0.2)",
            decoherence_integrand(theta, 0.5, &lambda_pair(0.1, 0.2, 0.0), &beam(0.5)),
            integrand_reference(theta, 0.5, 0.1, 0.2, 0.0, 0.5),
            1e-6,
            Measure::Relative,
            "expm1 split with compensated sum",
        ),
    ]
}

fn halfplane_probability() -> Vec<OracleReport> {
    let zero = ThermalState::zero();
    let g = PathPairGeometry::new(1e-6, 1e-5, 0.0, LengthUnit::Meters).expect("valid geometry");
    let b9 = beam(0.9);
    let hot = lambda_pair(50.0, 100.0, 0.0);
    let b5 = beam(0.5);
    let t = one_kelvin_scale();
    let far = PathPairGeometry::new(1e-9, 1e-3, 0.0, LengthUnit::Meters).expect("valid geometry");
    let log_form = velocity_factor_f(&b5, VelocityFactorMethod::ClosedForm).map(|f| FINE_STRUCTURE / (2.0 * PI) * f * 1e6f64.ln());
    let contrast = fringe_visibility(0.2, 0.0, &[0.0, 0.5], 1.0)
        .map(|v| (v[0] - v[1]) / (v[0] + v[1]))
        .unwrap_or(f64::NAN);
    vec![
        OracleReport::from_result(
            "P(T=0,d2/d1=1)",
            decoherence_probability(&lambda_pair(1.0, 1.0, 0.0), &b5, &t),
            0.0,
            0.0,
            Measure::Absolute,
            "short-circuit",
        ),
        OracleReport::from_result(
            "P(T=0,d2/d1=10,beta=0.9)",
            decoherence_probability(&g, &b9, &zero),
            decoherence_zero_temperature_closed(&g, &b9).unwrap_or(f64::NAN),
            1e-6,
            Measure::Relative,
            "closed form",
        ),
        OracleReport::from_result(
            "P(d1=50,d2=100 lambda_T,beta=0.5)",
            decoherence_probability(&hot, &b5, &t),
            decoherence_high_temperature_closed(&hot, &b5, &t).unwrap_or(f64::NAN),
            1e-2,
            Measure::Relative,
            "high-temperature asymptote",
        ),
        OracleReport::new(
            "P_closed(d2/d1=1e6) vs leading log",
            decoherence_zero_temperature_closed(&far, &b5).unwrap_or(f64::NAN),
            log_form.unwrap_or(f64::NAN),
            1e-2,
            Measure::Relative,
            "(alpha/2pi) f |log(d2/d1)|",
        ),
        OracleReport::new("fringe_contrast(P=0.2)", contrast, (-0.2f64).exp(), 1e-12, Measure::Relative, "exp(-P)"),
    ]
}

fn halfplane_brute_force() -> Vec<OracleReport> {
    let mut rows = Vec::new();
    let mut draws = Draws(380);
    for i in 0..20 {
        let hot = i % 2 == 0;
        let (d1, d2) = (draws.log_uniform(0.02, 5.0), draws.log_uniform(0.02, 5.0));
        let p = if i % 4 < 2 { 0.0 } else { draws.log_uniform(0.01, 2.0) };
        let beta = draws.uniform(0.1, 0.95);
        let unit = if hot { LengthUnit::ThermalWavelength } else { LengthUnit::Meters };
        let g = PathPairGeometry::new(d1, d2, p, unit).expect("valid geometry");
        let thermal = if hot { one_kelvin_scale() } else { ThermalState::zero() };
        let b = beam(beta);
        let name = format!("P_brute(d1={d1:.4},d2={d2:.4},dperp={p:.4},beta={beta:.3},{})", if hot { "T>0" } else { "T=0" });
        let production = decoherence_probability(&g, &b, &thermal);
        match brute_force_halfplane_p(&g, &b, &thermal, 2000, 2000) {
            Ok(o) => {
                let tol = f64::max(1e-5, 3.0 * (o.error_estimate + 1e-9 * o.value.abs()) / o.value.abs());
                rows.push(OracleReport::from_result(&name, production, o.value, tol, Measure::Relative, "2000 x 2000 trapezoid"));
            }
            Err(_) => rows.push(OracleReport::new(name, f64::NAN, f64::NAN, 1e-5, Measure::Relative, "oracle failed")),
        }
    }
    let g = lambda_pair(0.1, 0.5, 0.2);
    let b = beam(0.5);
    let t = one_kelvin_scale();
    let convergence = brute_force_halfplane_p(&g, &b, &t, 2000, 2000)
        .map(|o| 3.0 * o.error_estimate / o.value)
        .unwrap_or(f64::NAN);
    rows.push(OracleReport::new("brute_force_half_grid_change", convergence, 0.0, 1e-6, Measure::Absolute, "2000 vs 1000 points per axis"));
    let coincident = brute_force_halfplane_p(&lambda_pair(0.3, 0.3, 0.0), &b, &t, 1000, 1000).map(|o| o.value);
    rows.push(OracleReport::new("brute_force_coincident", coincident.unwrap_or(f64::NAN), 0.0, 1e-12, Measure::Absolute, "1000 x 1000"));
    rows
}

/// Least-squares slope of ln y against ln x.
fn log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| {
        let dx = x.ln() - mx;
        (a + dx * (y.ln() - my), b + dx * dx)
    });
    num / den
}

fn spectral() -> Vec<OracleReport> {
    let zero = ThermalState::zero();
    let b9 = beam(0.9);
    let wide = lambda_pair(1.0, 1e4, 0.0);
    let points: Vec<(f64, f64)> = (0..=20)
        .map(|i| {
            let w = 10f64.powf(-4.0 + 0.1 * i as f64);
            (w, spectral_density_normalized(&wide, &b9, &zero, w).unwrap_or(f64::NAN))
        })
        .collect();
    let mut rows = vec![OracleReport::new("spectral_slope(d2/d1=1e4)", log_slope(&points), -1.0, 0.05, Measure::Absolute, "21 points over 1e-4..1e-2")];

    let mut violations = 0;
    for i in 0..=30 {
        let w = 10f64.powf(-4.0 + 0.1 * i as f64) * 0.99;
        let d = |r: f64| spectral_density_normalized(&lambda_pair(1.0, r, 0.0), &b9, &zero, w).unwrap_or(f64::NAN);
        let (a, b, c) = (d(2.0), d(5.0), d(20.0));
        if !(a < b && b < c) {
            violations += 1;
        }
    }
    rows.push(OracleReport::new("spectral_ordering_violations(2,5,20)", violations as f64, 0.0, 0.0, Measure::Absolute, "31 points below 0.1"));

    // ∫ dω over ln ω in meters
    let g = PathPairGeometry::new(1e-6, 3e-6, 5e-7, LengthUnit::Meters).expect("valid geometry");
    let b = beam(0.5);
    for thermal in [zero, ThermalState::from_kelvin(300.0).expect("valid temperature")] {
        let scale = SPEED_OF_LIGHT / 1e-6;
        let integral = integrate_adaptive(
            |v| {
                let w = scale * v.exp();
                w * spectral_density(&g, &b, &thermal, w).unwrap_or(f64::NAN)
            },
            (1e-9f64).ln(),
            (60.0f64).ln(),
            1e-9,
            1e-300,
            &[],
        )
        .map(|r| r.value)
        .unwrap_or(f64::NAN);
        rows.push(OracleReport::from_result(
            &format!("integrated_spectral_density(T={})", thermal.temperature()),
            decoherence_probability(&g, &b, &thermal),
            integral,
            1e-5,
            Measure::Relative,
            "adaptive in ln omega",
        ));
    }
    rows
}

fn panel_integrals() -> Vec<OracleReport> {
    let geometry = RibbonGeometry::new(1.0, 4).expect("valid ribbon");
    let h = geometry.panel_width();
    let mut rows = Vec::new();
    let analytic = |n: u8, q: Complex64, d: f64| -> Complex64 {
        let hi = interval_primitive(n, q, (d + 0.5) * h);
        let lo = interval_primitive(n, q, (d - 0.5) * h);
        match (hi, lo) {
            (Ok(a), Ok(b)) => a - b,
            _ => Complex64::new(f64::NAN, 0.0),
        }
    };
    for (q, label, tol) in [(Complex64::new(1.3, 0.0), "real", 1e-7), (Complex64::new(0.0, -7.0), "imaginary", 1e-6)] {
        for (n, j, jp) in [(0u8, 1usize, 0usize), (1, 1, 0), (2, 1, 0), (0, 3, 0), (2, 0, 2), (0, 2, 2)] {
            let oracle = brute_force_panel_integral(n, q, j, jp, &geometry, 100_000).unwrap_or(Complex64::new(f64::NAN, 0.0));
            rows.push(OracleReport::complex(
                format!("I{n}[{j},{jp}](Q {label})"),
                analytic(n, q, j as f64 - jp as f64),
                oracle,
                tol,
                "Simpson, 1e5 subpanels",
            ));
        }
        rows.push(OracleReport::new(
            format!("I1[1,1](Q {label})"),
            analytic(1, q, 0.0).norm(),
            0.0,
            0.0,
            Measure::Absolute,
            "parity",
        ));
        rows.push(OracleReport::complex(
            format!("I2[1,1](Q {label})"),
            analytic(2, q, 0.0),
            self_panel_second_derivative(q, h, h / 20.0, 100_000),
            1e-6,
            "excluded interval h/20, Simpson 1e5",
        ));
    }
    rows
}

fn ribbon_solver() -> Vec<OracleReport> {
    let b = beam(0.5);
    let mut rows = Vec::new();
    // persymmetry: reversing the panels maps block d to block −d with the
    // off-diagonal coupling changing sign
    let geometry = RibbonGeometry::new(1.0, 2).expect("valid ribbon");
    let mut worst = 0.0f64;
    for (k, ky) in [(3.0, 1.0), (1.0, 2.0)] {
        if let Ok(system) = WaveContext::new(k, ky, &b).and_then(|c| assemble_system(&geometry, &c)) {
            let plus = system.matrix.block(1).0;
            let minus = system.matrix.block(-1).0;
            for r in 0..2 {
                for c in 0..2 {
                    let sign = if r == c { 1.0 } else { -1.0 };
                    let scale = plus[r][c].norm().max(1e-300);
                    worst = worst.max((minus[r][c] - sign * plus[r][c]).norm() / scale);
                }
            }
        } else {
            worst = f64::INFINITY;
        }
    }
    rows.push(OracleReport::new("persymmetry(N=2)", worst, 0.0, 1e-14, Measure::Absolute, "block comparison"));

    // wide ribbon against the half-plane kernels, evanescent k_y > k
    let (k, mu) = (1.0, 1.5);
    let wide = RibbonGeometry::new(50.0, 1000).expect("valid ribbon");
    let kernels = half_plane_kernels(k, mu, 0.5);
    let bem = WaveContext::new(k, k * mu, &b)
        .and_then(|c| assemble_system(&wide, &c))
        .and_then(|s| {
            let sol = solve_induced_current(&s)?;
            Ok(2.0 * projected_current(&s, &sol) / s.context.kappa())
        })
        .unwrap_or(Complex64::new(f64::NAN, 0.0));
    rows.push(OracleReport::complex("wide_ribbon_kernel vs singular-edge current", bem, kernels.singular_edge, 2e-2, "kW=50, N=1000"));
    rows.push(OracleReport::complex("wide_ribbon_kernel vs regular-edge current", bem, kernels.regular_edge, 2e-2, "kW=50, N=1000"));

    // N doubling: panel pairs of the 2N solution averaged onto the N grid
    let solve = |n: usize| -> Option<Vec<[Complex64; 2]>> {
        let g = RibbonGeometry::new(1.0, n).ok()?;
        let s = WaveContext::new(5.0, 2.5, &b).and_then(|c| assemble_system(&g, &c)).ok()?;
        let sol = solve_induced_current(&s).ok()?;
        Some(sol.currents.iter().zip(&sol.corrections).map(|(a, c)| [a[0] + c[0], a[1] + c[1]]).collect())
    };
    let change = match (solve(200), solve(400)) {
        (Some(coarse), Some(fine)) => {
            let mut diff = 0.0f64;
            let mut size = 0.0f64;
            for (j, c) in coarse.iter().enumerate() {
                for comp in 0..2 {
                    let avg = 0.5 * (fine[2 * j][comp] + fine[2 * j + 1][comp]);
                    diff = diff.max((avg - c[comp]).norm());
                    size = size.max(avg.norm());
                }
            }
            diff / size
        }
        _ => f64::NAN,
    };
    rows.push(OracleReport::new("current_change(N=200->400)", change, 0.0, 5e-3, Measure::Absolute, "kW=5, k_y/k=0.5, inf-norm"));
    rows
}

fn ribbon_gamma() -> Vec<OracleReport> {
    let b = beam(0.5);
    let (x1, x2) = (1e-3, 2e-3);
    let g = PathPairGeometry::new(x1, x2, 0.0, LengthUnit::Meters).expect("valid geometry");
    let geometry = RibbonGeometry::new(100.0 * (x1 + x2), 1000).expect("valid ribbon");
    let omega = 0.2 * SPEED_OF_LIGHT / x1;
    vec![OracleReport::from_result(
        "gamma_ribbon(W=100(x1+x2)) vs half-plane",
        gamma_ribbon(&g, &b, &geometry, omega),
        gamma_spectral(&g, &b, omega).unwrap_or(f64::NAN),
        2e-2,
        Measure::Relative,
        "N=1000, kx1=0.2",
    )]
}

fn ribbon_probability() -> Vec<OracleReport> {
    let b = beam(0.5);
    let mut rows = Vec::new();
    let opts = RibbonOptions { rel_tol: 1e-3, max_level: 1 };
    let small: Vec<PathPairGeometry> = [1e-3, 1e-2]
        .iter()
        .map(|&d| PathPairGeometry::new(d, d + 20.0, 0.0, LengthUnit::RibbonWidth).expect("valid geometry"))
        .collect();
    let geometry = RibbonGeometry::new(1.0, 200).expect("valid ribbon");
    let sweep = decoherence_probability_ribbon_sweep(&small, &[ThermalState::zero()], &b, &geometry, opts);
    for (i, p) in small.iter().enumerate() {
        let value = sweep.as_ref().map(|s| s.estimates[i][0].value).unwrap_or(f64::NAN);
        rows.push(OracleReport::new(
            format!("ribbon_P(d={}W,D=20W,T=0) vs closed form", p.d1),
            value,
            decoherence_zero_temperature_closed(p, &b).unwrap_or(f64::NAN),
            2e-2,
            Measure::Relative,
            "N=200",
        ));
    }
    rows.push(OracleReport::new(
        "ribbon_max_residual",
        sweep.as_ref().map(|s| s.max_residual).unwrap_or(f64::NAN),
        0.0,
        1e-8,
        Measure::Absolute,
        "every solved node",
    ));

    // W = λ_T, D = 0.01W: heating raises P at every d
    let width = 1e-3;
    let hot = ThermalState::from_wavelength(width).expect("valid wavelength");
    let pairs: Vec<PathPairGeometry> = [0.01, 0.1, 1.0, 10.0]
        .iter()
        .map(|&d| PathPairGeometry::new(d * width, (d + 0.01) * width, 0.0, LengthUnit::Meters).expect("valid geometry"))
        .collect();
    let geometry = RibbonGeometry::new(width, 32).expect("valid ribbon");
    let violations = decoherence_probability_ribbon_sweep(&pairs, &[ThermalState::zero(), hot], &b, &geometry, opts)
        .map(|s| s.estimates.iter().filter(|e| !(e[1].value > e[0].value)).count() as f64)
        .unwrap_or(f64::NAN);
    rows.push(OracleReport::new("ribbon_thermal_excess_violations(W=lambda_T)", violations, 0.0, 0.0, Measure::Absolute, "N=32"));
    rows
}
