//! Boundary-element solver for a perfectly conducting ribbon of width W.
//!
//! The ribbon occupies −W < x < 0 in the plane z = 0 and is infinite along y.
//! After Fourier transforming in y, the induced current is piecewise constant
//! on N equal panels and is fixed by collocation at the panel midpoints. The
//! kernel depends on panel differences only, so the 2N×2N system is block
//! Toeplitz.
//!
//! Internally every length is measured in units of W: u = kW, q = k_yW.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::constants::{FINE_STRUCTURE, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::halfplane::{bracket, BeamParameters, Estimate, LengthUnit, PathPairGeometry, ThermalState};
use crate::numerics::{gauss_legendre_unit, integrate_adaptive_with, Block2, BlockToeplitz, QuadValue, QuadratureOptions, SolveMethod};
use crate::special_functions::{bessel_k01, struve_l, struve_m_asymptotic, thermal_factor};

/// Largest relative collocation residual accepted from a solve.
pub const RESIDUAL_LIMIT: f64 = 1e-8;

/// Beyond this |Q x| the Struve–Bessel products in H⁰ are formed from the
/// algebraic M expansion, where the exponentially large parts cancel exactly.
const PRIMITIVE_ASYMPTOTIC_ARGUMENT: f64 = 25.0;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RibbonGeometry {
    width: f64,
    panels: usize,
}

impl RibbonGeometry {
    pub fn new(width: f64, panels: usize) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::invalid("width", width, "ribbon width must be finite and > 0"));
        }
        if panels == 0 {
            return Err(Error::invalid("panels", 0.0, "need at least one panel"));
        }
        Ok(Self { width, panels })
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn panel_width(&self) -> f64 {
        self.width / self.panels as f64
    }

    /// Panel midpoints −W + (j + ½)h.
    pub fn collocation_points(&self) -> Vec<f64> {
        let h = self.panel_width();
        (0..self.panels)
            .map(|j| -self.width + (j as f64 + 0.5) * h)
            .collect()
    }
}

/// One (ω, k_y) Fourier component. Wavenumbers are in inverse units of the
/// ribbon width's length unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveContext {
    k: f64,
    k_y: f64,
    kappa: f64,
    big_k: Complex64,
    q: Complex64,
}

impl WaveContext {
    /// κ = √((k/βγ)² + k_y²); K = √(k² − k_y² + i0⁺); Q = √(k_y² − k² − i0⁺).
    pub fn new(k: f64, k_y: f64, beam: &BeamParameters) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::invalid("k", k, "must be finite and > 0"));
        }
        if !k_y.is_finite() {
            return Err(Error::invalid("k_y", k_y, "must be finite"));
        }
        let ky = k_y.abs();
        if ky == k {
            return Err(Error::invalid("k_y", k_y, "branch point |k_y| = k is excluded"));
        }
        let root = ((k - ky) * (k + ky)).abs().sqrt();
        Ok(Self::build(k, k_y, root, ky < k, beam))
    }

    /// Propagating component with k_y = k sin φ and √(k² − k_y²) = k cos φ,
    /// given (sin φ, cos φ) so the branch point is approached without
    /// cancellation.
    pub fn from_direction(k: f64, sin_phi: f64, cos_phi: f64, beam: &BeamParameters) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::invalid("k", k, "must be finite and > 0"));
        }
        if !(cos_phi > 0.0 && cos_phi <= 1.0 && (0.0..=1.0).contains(&sin_phi)) {
            return Err(Error::invalid("cos_phi", cos_phi, "direction must satisfy 0 < cos φ ≤ 1, sin φ ≥ 0"));
        }
        Ok(Self::build(k, k * sin_phi, k * cos_phi, true, beam))
    }

    fn build(k: f64, k_y: f64, root: f64, propagating: bool, beam: &BeamParameters) -> Self {
        let (big_k, q) = if propagating {
            (Complex64::new(root, 0.0), Complex64::new(0.0, -root))
        } else {
            (Complex64::new(0.0, root), Complex64::new(root, 0.0))
        };
        Self {
            k,
            k_y,
            kappa: (k * beam.eta()).hypot(k_y),
            big_k,
            q,
        }
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn k_y(&self) -> f64 {
        self.k_y
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Im K ≥ 0.
    pub fn big_k(&self) -> Complex64 {
        self.big_k
    }

    /// Re Q ≥ 0.
    pub fn q(&self) -> Complex64 {
        self.q
    }

    pub fn is_propagating(&self) -> bool {
        self.q.re == 0.0
    }
}

/// Antiderivatives Hⁿ(x) of the panel kernels, n ∈ {0, 1, 2}:
/// H⁰ = −iπx[L₋₁(Q|x|)K₀(Q|x|) + L₀(Q|x|)K₁(Q|x|)], H¹ = −2iK₀(Q|x|),
/// H² = 2i sign(x) Q K₁(Q|x|). Note dH⁰/dx = H¹.
pub fn interval_primitive(n: u8, q: Complex64, x: f64) -> Result<Complex64> {
    if !x.is_finite() {
        return Err(Error::invalid("x", x, "must be finite"));
    }
    if n > 2 {
        return Err(Error::invalid("n", n as f64, "primitive order must be 0, 1 or 2"));
    }
    if x == 0.0 {
        return match n {
            0 => Ok(Complex64::new(0.0, 0.0)),
            _ => Err(Error::invalid("x", x, "H¹ and H² are singular at x = 0")),
        };
    }
    let t = q * x.abs();
    let (k0, k1) = bessel_k01(t)?;
    primitive_from_k(n, q, x, t, k0, k1)
}

fn primitive_from_k(n: u8, q: Complex64, x: f64, t: Complex64, k0: Complex64, k1: Complex64) -> Result<Complex64> {
    Ok(match n {
        0 => {
            let bracket = if t.norm() > PRIMITIVE_ASYMPTOTIC_ARGUMENT {
                t.inv() + k0 * struve_m_asymptotic(-1, t) + k1 * struve_m_asymptotic(0, t)
            } else {
                struve_l(-1, t)? * k0 + struve_l(0, t)? * k1
            };
            -I * PI * x * bracket
        }
        1 => -2.0 * I * k0,
        _ => 2.0 * I * x.signum() * q * k1,
    })
}

/// H⁰, H¹, H² at x = (m + ½)h, m = 0 … N−1.
fn primitive_table(q: Complex64, h: f64, n: usize) -> Result<[Vec<Complex64>; 3]> {
    let mut table = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
    for m in 0..n {
        let x = (m as f64 + 0.5) * h;
        let t = q * x;
        let (k0, k1) = bessel_k01(t)?;
        for (order, column) in table.iter_mut().enumerate() {
            column.push(primitive_from_k(order as u8, q, x, t, k0, k1)?);
        }
    }
    Ok(table)
}

/// Collocation system for one (ω, k_y) component.
#[derive(Debug, Clone)]
pub struct RibbonBemSystem {
    pub context: WaveContext,
    pub geometry: RibbonGeometry,
    pub matrix: BlockToeplitz,
    /// [1, i k_y/κ] e^{κ x̃_j}; the path-dependent phase is factored out.
    pub rhs: Vec<[Complex64; 2]>,
}

/// Builds the block-Toeplitz system from the 2N − 1 distinct panel differences.
pub fn assemble_system(geometry: &RibbonGeometry, context: &WaveContext) -> Result<RibbonBemSystem> {
    let n = geometry.panels;
    let h = geometry.panel_width();
    let [h0, h1, h2] = primitive_table(context.q, h, n)?;
    // H⁰ and H² are odd, H¹ even.
    let at = |col: &[Complex64], odd: bool, half_index: isize| -> Complex64 {
        // value at x = (half_index + ½)h for half_index ≥ 0, mirrored otherwise
        if half_index >= 0 {
            col[half_index as usize]
        } else {
            let v = col[(-half_index - 1) as usize];
            if odd {
                -v
            } else {
                v
            }
        }
    };
    let k2 = context.k * context.k;
    let ky = context.k_y;
    // k² − k_y² = −Q²
    let transverse = -(context.q * context.q).re;
    let mut blocks = Vec::with_capacity(2 * n - 1);
    for d in -(n as isize - 1)..=(n as isize - 1) {
        // (d ± ½)h: upper end has half index d, lower end d − 1
        let diff = |col: &[Complex64], odd: bool| at(col, odd, d) - at(col, odd, d - 1);
        let i0 = diff(&h0, true);
        let i1 = diff(&h1, false);
        let i2 = diff(&h2, true);
        let off = I * ky * i1;
        blocks.push(Block2([[i0 * k2 + i2, off], [off, i0 * transverse]]));
    }
    let matrix = BlockToeplitz::new(n, blocks)?;
    let ratio = I * (ky / context.kappa);
    let rhs = geometry
        .collocation_points()
        .into_iter()
        .map(|x| {
            let e = Complex64::new((context.kappa * x).exp(), 0.0);
            [e, ratio * e]
        })
        .collect();
    Ok(RibbonBemSystem {
        context: *context,
        geometry: *geometry,
        matrix,
        rhs,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InducedCurrentSolution {
    /// Normalized panel currents (J_x, J_y).
    pub currents: Vec<[Complex64; 2]>,
    /// Low-order parts from compensated refinement; the solution is
    /// `currents + corrections`.
    pub corrections: Vec<[Complex64; 2]>,
    pub residual_inf: f64,
    pub method: SolveMethod,
}

/// Solves the collocation system. The right-hand side is path independent,
/// so one solution serves both electron paths.
pub fn solve_induced_current(system: &RibbonBemSystem) -> Result<InducedCurrentSolution> {
    let sol = system.matrix.solve(&system.rhs)?;
    if !(sol.residual <= RESIDUAL_LIMIT) {
        return Err(Error::Residual {
            residual: sol.residual,
            limit: RESIDUAL_LIMIT,
            k_w: system.context.k * system.geometry.width,
            mu: system.context.k_y / system.context.k,
        });
    }
    Ok(InducedCurrentSolution {
        currents: sol.solution,
        corrections: sol.correction,
        residual_inf: sol.residual,
        method: sol.method,
    })
}

/// sinh(κh/2) Σ_j e^{κx̃_j} [J_x − i(k_y/κ)J_y], with the sinh folded into
/// the exponentials so nothing overflows.
pub fn projected_current(system: &RibbonBemSystem, solution: &InducedCurrentSolution) -> Complex64 {
    let ctx = &system.context;
    let half = 0.5 * system.geometry.panel_width();
    let ratio = I * (ctx.k_y / ctx.kappa);
    let points = system.geometry.collocation_points();
    let weighted = |currents: &[[Complex64; 2]]| {
        points
            .iter()
            .zip(currents)
            .fold(Complex64::new(0.0, 0.0), |acc, (&x, j)| {
                let w = 0.5 * ((ctx.kappa * (x + half)).exp() - (ctx.kappa * (x - half)).exp());
                acc + (j[0] - ratio * j[1]) * w
            })
    };
    weighted(&solution.currents) + weighted(&solution.corrections)
}

/// Below this distance from grazing incidence, π/2 − φ, the angular
/// integral runs in ln(π/2 − φ); a quasi-static strip resonance sits there.
const GRAZING_SPLIT: f64 = 0.25;
const GRAZING_FLOOR: f64 = 1e-7;

struct KernelValue {
    value: f64,
    kappa: f64,
    k_y: f64,
    residual: f64,
}

/// Path-independent part of the (u, φ) integrand in W units:
/// u cos φ sinh(κh/2) Re S / κ with k_y = k sin φ.
fn spectral_kernel(u: f64, sin_phi: f64, cos_phi: f64, beam: &BeamParameters, panels: usize) -> Result<KernelValue> {
    let unit = RibbonGeometry { width: 1.0, panels };
    let ctx = WaveContext::from_direction(u, sin_phi, cos_phi, beam)?;
    let system = assemble_system(&unit, &ctx)?;
    let sol = solve_induced_current(&system)?;
    let re_s = projected_current(&system, &sol).re;
    Ok(KernelValue {
        value: u * cos_phi * re_s / ctx.kappa,
        kappa: ctx.kappa,
        k_y: ctx.k_y,
        residual: sol.residual_inf,
    })
}

/// ∫₀^{π/2} dφ f(sin φ, cos φ), linear in φ away from grazing and
/// logarithmic in π/2 − φ near it. Returns (value, error estimate).
fn integrate_over_angle<V, F>(mut f: F, opts: QuadratureOptions) -> Result<(V, V)>
where
    V: QuadValue,
    F: FnMut(f64, f64) -> Result<V>,
{
    let bulk = integrate_adaptive_with(
        |phi: f64| {
            let (s, c) = phi.sin_cos();
            f(s, c)
        },
        0.0,
        FRAC_PI_2 - GRAZING_SPLIT,
        opts,
        &[],
    )?;
    let edge = integrate_adaptive_with(
        |t: f64| {
            let x = t.exp();
            let (c, s) = x.sin_cos();
            Ok::<V, Error>(f(s, c)?.map(|v| v * x))
        },
        GRAZING_FLOOR.ln(),
        GRAZING_SPLIT.ln(),
        opts,
        &[],
    )?;
    let mut value = bulk.value;
    value.add_scaled(&edge.value, 1.0);
    let mut error = bulk.error_estimate;
    error.add_scaled(&edge.error_estimate, 1.0);
    Ok((value, error))
}

const RULE_ORDER: usize = 5;
/// Panel widths of the level-zero rules: ln u, and ln(π/2 − φ) near grazing.
const OUTER_PANEL: f64 = 1.5;
const EDGE_PANEL: f64 = 3.0;

/// Composite Gauss–Legendre nodes (x, weight) on [a, b].
fn composite_rule(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre_unit(RULE_ORDER);
    let h = (b - a) / panels as f64;
    (0..panels)
        .flat_map(|p| {
            let mid = a + (p as f64 + 0.5) * h;
            x.iter().zip(w).map(move |(xi, wi)| (mid + 0.5 * h * xi, 0.5 * h * wi))
        })
        .collect()
}

/// Nodes (sin φ, cos φ, weight) of the split angular rule, with panel
/// widths halved `level` times.
fn angular_nodes(level: u32) -> Vec<(f64, f64, f64)> {
    let refine = 1usize << level;
    let mut nodes: Vec<(f64, f64, f64)> = composite_rule(0.0, FRAC_PI_2 - GRAZING_SPLIT, 2 * refine)
        .into_iter()
        .map(|(phi, w)| {
            let (s, c) = phi.sin_cos();
            (s, c, w)
        })
        .collect();
    let (a, b) = (GRAZING_FLOOR.ln(), GRAZING_SPLIT.ln());
    let edge_panels = ((b - a) / EDGE_PANEL).ceil() as usize * refine;
    nodes.extend(composite_rule(a, b, edge_panels).into_iter().map(|(t, w)| {
        let x = t.exp();
        let (c, s) = x.sin_cos();
        (s, c, w * x)
    }));
    nodes
}

fn path_pair_in_width_units(paths: &PathPairGeometry, geometry: &RibbonGeometry) -> Result<PathPairGeometry> {
    paths.validate()?;
    let scale = match paths.unit {
        LengthUnit::RibbonWidth => 1.0,
        LengthUnit::Meters => 1.0 / geometry.width,
        LengthUnit::ThermalWavelength => {
            return Err(Error::invalid(
                "unit",
                f64::NAN,
                "ribbon paths need meters or ribbon-width units",
            ))
        }
    };
    let mut g = paths.scaled(scale);
    g.unit = LengthUnit::RibbonWidth;
    Ok(g)
}

/// Generalized loss probability Γ(R₁, R₂, ω) near the ribbon, in seconds.
/// Paths and width in meters, ω in rad/s.
pub fn gamma_ribbon(paths: &PathPairGeometry, beam: &BeamParameters, geometry: &RibbonGeometry, omega: f64) -> Result<f64> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::invalid("omega", omega, "must be finite and > 0"));
    }
    if paths.unit != LengthUnit::Meters {
        return Err(Error::invalid("unit", f64::NAN, "gamma_ribbon takes lengths in meters"));
    }
    let g = path_pair_in_width_units(paths, geometry)?;
    let u = omega * geometry.width / SPEED_OF_LIGHT;
    let (value, _) = integrate_over_angle(
        |s, c| -> Result<f64> {
            let k = spectral_kernel(u, s, c, beam, geometry.panels)?;
            Ok(k.value * (-k.kappa * (g.d1 + g.d2)).exp() * (k.k_y * g.d_perp).cos())
        },
        QuadratureOptions::new(1e-6, 1e-300),
    )?;
    let beta = beam.beta();
    Ok(8.0 * FINE_STRUCTURE * geometry.width / (beta * beta * SPEED_OF_LIGHT) * value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RibbonOptions {
    /// Relative tolerance per (pair, temperature) entry, checked between
    /// successive halvings of the quadrature panels.
    pub rel_tol: f64,
    /// Number of halvings allowed after the coarsest rule.
    pub max_level: u32,
}

impl Default for RibbonOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-4,
            max_level: 3,
        }
    }
}

/// Sweep output: estimates indexed `[pair][thermal]` plus the worst
/// collocation residual met on any node. `converged` is false when the
/// finest level still missed the tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct RibbonSweep {
    pub estimates: Vec<Vec<Estimate>>,
    pub max_residual: f64,
    pub solves: usize,
    pub converged: bool,
}

/// Decoherence probability P near the ribbon.
pub fn decoherence_probability_ribbon(
    paths: &PathPairGeometry,
    beam: &BeamParameters,
    thermal: &ThermalState,
    geometry: &RibbonGeometry,
) -> Result<f64> {
    let sweep = decoherence_probability_ribbon_sweep(
        std::slice::from_ref(paths),
        std::slice::from_ref(thermal),
        beam,
        geometry,
        RibbonOptions::default(),
    )?;
    Ok(sweep.estimates[0][0].value)
}

/// Evaluates P for every (path pair, temperature) combination on one shared
/// set of quadrature nodes, so each BEM solve is reused by all of them.
///
/// The integral runs over ln(kW) outside and k_y = k sin φ inside; evanescent
/// k_y > k carries no loss and is skipped.
pub fn decoherence_probability_ribbon_sweep(
    paths: &[PathPairGeometry],
    thermals: &[ThermalState],
    beam: &BeamParameters,
    geometry: &RibbonGeometry,
    opts: RibbonOptions,
) -> Result<RibbonSweep> {
    if paths.is_empty() || thermals.is_empty() {
        return Err(Error::invalid("sweep", 0.0, "needs at least one path pair and one temperature"));
    }
    if !(opts.rel_tol > 0.0 && opts.rel_tol < 1.0) {
        return Err(Error::invalid("rel_tol", opts.rel_tol, "must lie in (0, 1)"));
    }
    let pairs: Vec<PathPairGeometry> = paths
        .iter()
        .map(|p| path_pair_in_width_units(p, geometry))
        .collect::<Result<_>>()?;
    // W/λ_T per temperature; zero at T = 0.
    let width_over_lambda: Vec<f64> = thermals
        .iter()
        .map(|t| {
            if t.is_zero() {
                Ok(0.0)
            } else if paths.iter().any(|p| p.unit != LengthUnit::Meters) {
                Err(Error::invalid(
                    "unit",
                    f64::NAN,
                    "finite temperature needs the ribbon width in meters",
                ))
            } else {
                Ok(geometry.width / t.lambda_t())
            }
        })
        .collect::<Result<_>>()?;

    let active: Vec<usize> = (0..pairs.len()).filter(|&i| !pairs[i].coincident()).collect();
    let n_t = thermals.len();
    let zero = Estimate {
        value: 0.0,
        error_estimate: 0.0,
        evaluations: 0,
    };
    let mut estimates = vec![vec![zero; n_t]; pairs.len()];
    if active.is_empty() {
        return Ok(RibbonSweep {
            estimates,
            max_residual: 0.0,
            solves: 0,
            converged: true,
        });
    }

    let eta = beam.eta();
    let nearest = active.iter().map(|&i| pairs[i].nearest()).fold(f64::INFINITY, f64::min);
    let farthest = active
        .iter()
        .map(|&i| pairs[i].d1.max(pairs[i].d2).max(pairs[i].d_perp))
        .fold(0.0, f64::max);
    let digits = (1.0 / opts.rel_tol).ln();
    let v_hi = (1.5 * digits / (2.0 * eta * nearest)).ln();
    let v_lo = (1e-2 * opts.rel_tol.cbrt() / farthest.max(1.0)).ln();

    let n_comp = active.len() * n_t;
    // Integrand of the ln u integral, one entry per (pair, temperature).
    let integrand = |u: f64, sin_phi: f64, cos_phi: f64, out: &mut [f64], weight: f64| -> Result<f64> {
        let k = spectral_kernel(u, sin_phi, cos_phi, beam, geometry.panels)?;
        let mut slot = out.iter_mut();
        for &i in &active {
            let p = &pairs[i];
            let (a, b) = (p.d1.min(p.d2), p.d1.max(p.d2));
            let base = weight * u * k.value * bracket(1.0, k.kappa, k.k_y, a, b, p.d_perp);
            for &r in &width_over_lambda {
                let coth = if r == 0.0 { 1.0 } else { thermal_factor(u / r)? };
                if let Some(o) = slot.next() {
                    *o += base * coth;
                }
            }
        }
        Ok(k.residual)
    };
    let outer_panels = ((v_hi - v_lo) / OUTER_PANEL).ceil().max(1.0) as usize;
    let evaluate = |level: u32| -> Result<(Vec<f64>, f64, usize)> {
        let angles = angular_nodes(level);
        let outer = composite_rule(v_lo, v_hi, outer_panels << level);
        let per_node: Vec<(Vec<f64>, f64)> = outer
            .par_iter()
            .map(|&(v, wv)| -> Result<(Vec<f64>, f64)> {
                let u = v.exp();
                let mut acc = vec![0.0; n_comp];
                let mut worst = 0.0f64;
                for &(s, c, wa) in &angles {
                    worst = worst.max(integrand(u, s, c, &mut acc, wv * wa)?);
                }
                Ok((acc, worst))
            })
            .collect::<Result<_>>()?;
        let mut total = vec![0.0; n_comp];
        let mut worst = 0.0f64;
        for (acc, r) in &per_node {
            for (t, a) in total.iter_mut().zip(acc) {
                *t += a;
            }
            worst = worst.max(*r);
        }
        Ok((total, worst, outer.len() * angles.len()))
    };

    let (mut value, mut max_residual, mut solves) = evaluate(0)?;
    let mut error = value.iter().map(|v| v.abs()).collect::<Vec<_>>();
    let mut converged = false;
    for level in 1..=opts.max_level {
        let (next, r, n) = evaluate(level)?;
        max_residual = max_residual.max(r);
        solves += n;
        error = next.iter().zip(&value).map(|(a, b)| (a - b).abs()).collect();
        value = next;
        if error.iter().zip(&value).all(|(e, v)| *e <= opts.rel_tol * v.abs()) {
            converged = true;
            break;
        }
    }

    let beta = beam.beta();
    let pre = 4.0 * FINE_STRUCTURE / (beta * beta);
    for (slot, &i) in active.iter().enumerate() {
        for t in 0..n_t {
            let c = slot * n_t + t;
            estimates[i][t] = Estimate {
                value: pre * value[c],
                error_estimate: pre * error[c],
                evaluations: solves,
            };
        }
    }
    Ok(RibbonSweep {
        estimates,
        max_residual,
        solves,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn beam() -> BeamParameters {
        BeamParameters::new(0.5).unwrap()
    }

    #[test]
    fn branch_conventions() {
        let b = beam();
        let prop = WaveContext::new(2.0, 1.0, &b).unwrap();
        assert!(prop.q().re == 0.0 && prop.q().im < 0.0);
        assert!(prop.big_k().im == 0.0 && prop.big_k().re > 0.0);
        assert_eq!(prop.q() * prop.q(), -(prop.big_k() * prop.big_k()));
        let evan = WaveContext::new(1.0, 2.0, &b).unwrap();
        assert!(evan.q().im == 0.0 && evan.q().re > 0.0);
        assert!(evan.big_k().re == 0.0 && evan.big_k().im > 0.0);
        assert_eq!(evan.q() * evan.q(), -(evan.big_k() * evan.big_k()));
        assert!(WaveContext::new(1.0, 1.0, &b).is_err());
    }

    #[test]
    fn h0_derivative_matches_h1() {
        for q in [Complex64::new(0.0, -0.7), Complex64::new(1.3, 0.0), Complex64::new(0.0, -40.0)] {
            for x in [0.3f64, -2.0, 5.0, 0.9] {
                let e = 1e-5 * x.abs();
                let fd = (interval_primitive(0, q, x + e).unwrap() - interval_primitive(0, q, x - e).unwrap()) / (2.0 * e);
                let h1 = interval_primitive(1, q, x).unwrap();
                assert!((fd - h1).norm() <= 1e-6 * h1.norm().max(1.0), "q={q} x={x}: {fd} vs {h1}");
            }
        }
    }

    #[test]
    fn h0_regimes_join_continuously() {
        let q = Complex64::new(0.0, -1.0);
        let below = interval_primitive(0, q, 24.999_999).unwrap();
        let above = interval_primitive(0, q, 25.000_001).unwrap();
        assert!((below - above).norm() < 1e-5 * below.norm());
    }

    #[test]
    fn self_panel_integrals() {
        let q = Complex64::new(0.0, -0.8);
        let h = 0.1;
        let i1 = interval_primitive(1, q, h / 2.0).unwrap() - interval_primitive(1, q, -h / 2.0).unwrap();
        assert_eq!(i1, Complex64::new(0.0, 0.0));
        let i2 = interval_primitive(2, q, h / 2.0).unwrap() - interval_primitive(2, q, -h / 2.0).unwrap();
        let (_, k1) = bessel_k01(q * (h / 2.0)).unwrap();
        assert!((i2 - 4.0 * I * q * k1).norm() < 1e-14 * i2.norm());
        assert!(interval_primitive(2, q, 0.0).is_err());
    }

    #[test]
    fn blocks_are_toeplitz_and_decouple_at_zero_ky() {
        let geom = RibbonGeometry::new(1.0, 6).unwrap();
        let ctx = WaveContext::new(3.0, 0.0, &beam()).unwrap();
        let sys = assemble_system(&geom, &ctx).unwrap();
        for j in 0..5 {
            for jp in 0..5 {
                assert_eq!(sys.matrix.get(j, jp), sys.matrix.get(j + 1, jp + 1));
            }
        }
        for d in -5..=5 {
            let b = sys.matrix.block(d);
            assert_eq!(b.0[0][1], Complex64::new(0.0, 0.0));
            assert_eq!(b.0[1][0], Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn evanescent_components_carry_no_loss() {
        let geom = RibbonGeometry::new(1.0, 40).unwrap();
        let ctx = WaveContext::new(5.0, 7.0, &beam()).unwrap();
        let sys = assemble_system(&geom, &ctx).unwrap();
        let sol = solve_induced_current(&sys).unwrap();
        let s = projected_current(&sys, &sol);
        assert!(s.re.abs() <= 1e-12 * s.norm(), "{s}");
    }

    #[test]
    fn propagating_loss_is_positive_and_residual_small() {
        let geom = RibbonGeometry::new(1.0, 60).unwrap();
        for mu in [0.1, 0.5, 0.9] {
            let ctx = WaveContext::new(5.0, 5.0 * mu, &beam()).unwrap();
            let sys = assemble_system(&geom, &ctx).unwrap();
            let sol = solve_induced_current(&sys).unwrap();
            assert!(sol.residual_inf <= RESIDUAL_LIMIT);
            assert!(projected_current(&sys, &sol).re > 0.0);
        }
    }

    #[test]
    fn coincident_paths_vanish() {
        let geom = RibbonGeometry::new(1.0, 8).unwrap();
        let p = PathPairGeometry::new(0.3, 0.3, 0.0, LengthUnit::RibbonWidth).unwrap();
        let v = decoherence_probability_ribbon(&p, &beam(), &ThermalState::zero(), &geom).unwrap();
        assert_eq!(v, 0.0);
    }
}
