use num_complex::Complex64;

/// Number of integrand evaluations per Gauss–Kronrod panel.
pub const GK15_POINTS: usize = 15;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Values an adaptive rule can integrate: reals, complex numbers and real
/// vectors, all treated componentwise.
pub trait QuadValue: Clone {
    fn zero_like(&self) -> Self;
    /// self += w · other
    fn add_scaled(&mut self, other: &Self, w: f64);
    fn map(&self, f: impl Fn(f64) -> f64) -> Self;
    fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self;
    /// Largest f(a_i, b_i) over components.
    fn zip_max(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> f64;
    fn all_finite(&self) -> bool;
}

impl QuadValue for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn add_scaled(&mut self, other: &Self, w: f64) {
        *self += w * other;
    }
    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        f(*self)
    }
    fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        f(*self, *other)
    }
    fn zip_max(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> f64 {
        f(*self, *other)
    }
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

impl QuadValue for Complex64 {
    fn zero_like(&self) -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add_scaled(&mut self, other: &Self, w: f64) {
        *self += other * w;
    }
    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Complex64::new(f(self.re), f(self.im))
    }
    fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Complex64::new(f(self.re, other.re), f(self.im, other.im))
    }
    fn zip_max(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> f64 {
        f(self.re, other.re).max(f(self.im, other.im))
    }
    fn all_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl QuadValue for Vec<f64> {
    fn zero_like(&self) -> Self {
        vec![0.0; self.len()]
    }
    fn add_scaled(&mut self, other: &Self, w: f64) {
        for (a, b) in self.iter_mut().zip(other) {
            *a += w * b;
        }
    }
    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        self.iter().map(|&a| f(a)).collect()
    }
    fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        self.iter().zip(other).map(|(&a, &b)| f(a, b)).collect()
    }
    fn zip_max(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.iter()
            .zip(other)
            .map(|(&a, &b)| f(a, b))
            .fold(0.0, f64::max)
    }
    fn all_finite(&self) -> bool {
        self.iter().all(|a| a.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureResult<V> {
    pub value: V,
    /// Componentwise nonnegative error estimate.
    pub error_estimate: V,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum QuadratureError {
    #[error("quadrature did not converge after {evaluations} evaluations (estimate {estimate:e}, error {error:e})")]
    NonConvergence {
        estimate: f64,
        error: f64,
        evaluations: usize,
    },
    #[error("invalid quadrature input: {0}")]
    InvalidInput(&'static str),
    #[error("integrand is not finite at {at}")]
    NonFinite { at: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl QuadratureOptions {
    pub fn new(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            max_panels: 4000,
        }
    }

    pub fn with_max_panels(mut self, max_panels: usize) -> Self {
        self.max_panels = max_panels;
        self
    }
}

struct Panel<V> {
    a: f64,
    b: f64,
    value: V,
    error: V,
    splittable: bool,
}

fn gk15<V, E, F>(f: &mut F, a: f64, b: f64) -> Result<(V, V), E>
where
    V: QuadValue,
    E: From<QuadratureError>,
    F: FnMut(f64) -> Result<V, E>,
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = eval(f, centre)?;
    let mut samples: Vec<(V, V)> = Vec::with_capacity(7);
    for &x in XGK.iter().take(7) {
        let dx = half * x;
        samples.push((eval(f, centre - dx)?, eval(f, centre + dx)?));
    }
    let mut kronrod = fc.map(|v| v * WGK[7]);
    let mut gauss = fc.map(|v| v * WG[3]);
    for (j, (lo, hi)) in samples.iter().enumerate() {
        kronrod.add_scaled(lo, WGK[j]);
        kronrod.add_scaled(hi, WGK[j]);
        if j % 2 == 1 {
            gauss.add_scaled(lo, WG[j / 2]);
            gauss.add_scaled(hi, WG[j / 2]);
        }
    }
    // Mean absolute deviation from the panel mean, per component.
    let mean = kronrod.map(|v| 0.5 * v);
    let mut asc = fc.zip_map(&mean, |v, m| WGK[7] * (v - m).abs());
    for (j, (lo, hi)) in samples.iter().enumerate() {
        let dlo = lo.zip_map(&mean, |v, m| (v - m).abs());
        let dhi = hi.zip_map(&mean, |v, m| (v - m).abs());
        asc.add_scaled(&dlo, WGK[j]);
        asc.add_scaled(&dhi, WGK[j]);
    }
    let value = kronrod.map(|v| v * half);
    let asc = asc.map(|v| v * half.abs());
    let diff = value.zip_map(&gauss.map(|v| v * half), |k, g| (k - g).abs());
    let error = diff.zip_map(&asc, |d, s| {
        if s > 0.0 && d > 0.0 {
            s * (200.0 * d / s).powf(1.5).min(1.0)
        } else {
            d
        }
    });
    Ok((value, error))
}

fn eval<V, E, F>(f: &mut F, x: f64) -> Result<V, E>
where
    V: QuadValue,
    E: From<QuadratureError>,
    F: FnMut(f64) -> Result<V, E>,
{
    let v = f(x)?;
    if !v.all_finite() {
        return Err(QuadratureError::NonFinite { at: x }.into());
    }
    Ok(v)
}

fn ratio<V: QuadValue>(error: &V, total: &V, opts: &QuadratureOptions) -> f64 {
    error.zip_max(total, |e, t| e / opts.abs_tol.max(opts.rel_tol * t.abs()))
}

/// Globally adaptive Gauss–Kronrod (7/15) quadrature of a fallible,
/// possibly vector-valued integrand, pre-split at `hints`.
///
/// The final sum runs left to right over the panels so results do not
/// depend on refinement order.
pub fn integrate_adaptive_with<V, E, F>(
    mut f: F,
    a: f64,
    b: f64,
    opts: QuadratureOptions,
    hints: &[f64],
) -> Result<QuadratureResult<V>, E>
where
    V: QuadValue,
    E: From<QuadratureError>,
    F: FnMut(f64) -> Result<V, E>,
{
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(QuadratureError::InvalidInput("interval must be finite with a < b").into());
    }
    if !(opts.rel_tol > 0.0 && opts.abs_tol > 0.0) {
        return Err(QuadratureError::InvalidInput("tolerances must be positive").into());
    }
    let mut cuts = vec![a];
    let mut inner: Vec<f64> = hints.iter().copied().filter(|&h| h > a && h < b).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    cuts.extend(inner);
    cuts.push(b);

    let mut panels: Vec<Panel<V>> = Vec::new();
    for w in cuts.windows(2) {
        let (value, error) = gk15(&mut f, w[0], w[1])?;
        panels.push(Panel {
            a: w[0],
            b: w[1],
            value,
            error,
            splittable: true,
        });
    }
    let mut evaluations = GK15_POINTS * panels.len();
    loop {
        let (total, total_err) = sum_panels(&mut panels);
        let r = ratio(&total_err, &total, &opts);
        if r <= 1.0 {
            return Ok(QuadratureResult {
                value: total,
                error_estimate: total_err,
                evaluations,
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| p.splittable)
            .map(|(i, p)| (i, ratio(&p.error, &total, &opts)))
            .max_by(|x, y| x.1.total_cmp(&y.1));
        let exhausted = panels.len() >= opts.max_panels;
        let Some((i, _)) = worst.filter(|_| !exhausted) else {
            let estimate = total.zip_max(&total, |t, _| t.abs());
            let error = total_err.zip_max(&total_err, |e, _| e);
            return Err(QuadratureError::NonConvergence {
                estimate,
                error,
                evaluations,
            }
            .into());
        };
        let p = panels.swap_remove(i);
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) || (p.b - p.a) <= 1e-13 * p.a.abs().max(p.b.abs()) {
            panels.push(Panel { splittable: false, ..p });
            continue;
        }
        let (lv, le) = gk15(&mut f, p.a, mid)?;
        let (rv, re) = gk15(&mut f, mid, p.b)?;
        evaluations += 2 * GK15_POINTS;
        panels.push(Panel {
            a: p.a,
            b: mid,
            value: lv,
            error: le,
            splittable: true,
        });
        panels.push(Panel {
            a: mid,
            b: p.b,
            value: rv,
            error: re,
            splittable: true,
        });
    }
}

fn sum_panels<V: QuadValue>(panels: &mut [Panel<V>]) -> (V, V) {
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut total = panels[0].value.zero_like();
    let mut err = total.clone();
    for p in panels.iter() {
        total.add_scaled(&p.value, 1.0);
        err.add_scaled(&p.error, 1.0);
    }
    (total, err)
}

/// Real-valued convenience wrapper around [`integrate_adaptive_with`].
pub fn integrate_adaptive(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    singular_hints: &[f64],
) -> Result<QuadratureResult<f64>, QuadratureError> {
    integrate_adaptive_with(
        |x| Ok::<f64, QuadratureError>(f(x)),
        a,
        b,
        QuadratureOptions::new(rel_tol, abs_tol),
        singular_hints,
    )
}

/// ∫ₐ^∞ for integrands with an exponential tail of e-folding `decay_scale`.
///
/// The domain is truncated at a + decay_scale·ln(1/rel_tol)·1.5 and extended
/// by doubling until the exponential tail bound falls below rel_tol/10 of the
/// accumulated value.
pub fn integrate_semi_infinite_with<V, E, F>(
    mut f: F,
    a: f64,
    decay_scale: f64,
    opts: QuadratureOptions,
) -> Result<QuadratureResult<V>, E>
where
    V: QuadValue,
    E: From<QuadratureError>,
    F: FnMut(f64) -> Result<V, E>,
{
    if !(decay_scale > 0.0 && decay_scale.is_finite()) {
        return Err(QuadratureError::InvalidInput("decay scale must be positive").into());
    }
    let mut upper = a + decay_scale * (1.0 / opts.rel_tol).ln().max(1.0) * 1.5;
    let mut result = integrate_adaptive_with(&mut f, a, upper, opts, &[])?;
    for _ in 0..40 {
        let edge = eval(&mut f, upper)?;
        let tail = edge.map(|v| v.abs() * decay_scale);
        let small = tail.zip_max(&result.value, |t, v| {
            t / (0.1 * opts.rel_tol * v.abs()).max(opts.abs_tol)
        }) <= 1.0;
        result.evaluations += 1;
        if small {
            result.error_estimate.add_scaled(&tail, 1.0);
            return Ok(result);
        }
        let next = upper + (upper - a);
        let more = integrate_adaptive_with(&mut f, upper, next, opts, &[])?;
        result.value.add_scaled(&more.value, 1.0);
        result.error_estimate.add_scaled(&more.error_estimate, 1.0);
        result.evaluations += more.evaluations;
        upper = next;
    }
    let estimate = result.value.zip_max(&result.value, |t, _| t.abs());
    let error = result.error_estimate.zip_max(&result.error_estimate, |e, _| e);
    Err(QuadratureError::NonConvergence {
        estimate,
        error,
        evaluations: result.evaluations,
    }
    .into())
}

/// Real-valued convenience wrapper around [`integrate_semi_infinite_with`].
pub fn integrate_semi_infinite(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    decay_scale: f64,
    rel_tol: f64,
) -> Result<QuadratureResult<f64>, QuadratureError> {
    integrate_semi_infinite_with(
        |x| Ok::<f64, QuadratureError>(f(x)),
        a,
        decay_scale,
        QuadratureOptions::new(rel_tol, 1e-300),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn quarter_circle() {
        let r = integrate_adaptive(|m| (1.0 - m * m).sqrt(), 0.0, 1.0, 1e-12, 1e-14, &[]).unwrap();
        assert!((r.value - PI / 4.0).abs() < 1e-10);
        assert!(r.evaluations >= GK15_POINTS);
    }

    #[test]
    fn interior_log_singularity_with_hint() {
        let r = integrate_adaptive(|x| (x - 0.5f64).abs().ln(), 0.0, 1.0, 1e-12, 1e-14, &[0.5]).unwrap();
        assert!((r.value - (-1.0 - 2f64.ln())).abs() < 1e-9);
    }

    #[test]
    fn exponential_tails() {
        let r = integrate_semi_infinite(|x| (-x).exp(), 0.0, 1.0, 1e-12).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
        let r = integrate_semi_infinite(|x| x * (-2.0 * x).exp(), 0.0, 0.5, 1e-12).unwrap();
        assert!((r.value - 0.25).abs() < 1e-10);
    }

    #[test]
    fn vector_components_converge_together() {
        let r = integrate_adaptive_with(
            |x: f64| Ok::<_, QuadratureError>(vec![x.sin(), 1e-8 * x.exp()]),
            0.0,
            2.0,
            QuadratureOptions::new(1e-12, 1e-300),
            &[],
        )
        .unwrap();
        assert!((r.value[0] - (1.0 - 2f64.cos())).abs() < 1e-12);
        assert!((r.value[1] - 1e-8 * (2f64.exp() - 1.0)).abs() < 1e-19);
    }

    #[test]
    fn non_convergence_reports_estimate() {
        let err = integrate_adaptive_with(
            |x: f64| Ok::<f64, QuadratureError>(x.powf(-0.9) * (1.0 / x).sin()),
            0.0,
            1.0,
            QuadratureOptions::new(1e-15, 1e-300).with_max_panels(20),
            &[],
        )
        .unwrap_err();
        assert!(matches!(err, QuadratureError::NonConvergence { .. }));
    }
}
