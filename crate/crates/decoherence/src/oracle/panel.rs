//! Panel integrals of the 2D kernel derivatives by composite Simpson.

use num_complex::Complex64;

use super::functions::bessel_k_reference;
use crate::error::{Error, Result};
use crate::ribbon_bem::RibbonGeometry;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// ∂ₓⁿ of −2iK₀(Q|x|) integrated once: the integrand of Iⁿ.
fn kernel(n: u8, q: Complex64, x: f64) -> Complex64 {
    let t = q * x.abs();
    match n {
        0 => -2.0 * I * bessel_k_reference(0, t),
        1 => 2.0 * I * x.signum() * q * bessel_k_reference(1, t),
        _ => -2.0 * I * q * q * (bessel_k_reference(0, t) + bessel_k_reference(1, t) / t),
    }
}

fn simpson<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, subpanels: usize) -> Complex64 {
    let n = subpanels + subpanels % 2;
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        sum += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

/// Iⁿ_{jj′}: the order-n kernel integrated over panel j′ and evaluated at
/// collocation point j. Self-panel n = 2 is hypersingular and refused.
pub fn brute_force_panel_integral(
    n: u8,
    q: Complex64,
    j: usize,
    j_prime: usize,
    geometry: &RibbonGeometry,
    subpanels: usize,
) -> Result<Complex64> {
    if n > 2 {
        return Err(Error::invalid("n", n as f64, "order must be 0, 1 or 2"));
    }
    if j >= geometry.panels() || j_prime >= geometry.panels() {
        return Err(Error::invalid("j", j.max(j_prime) as f64, "panel index out of range"));
    }
    let h = geometry.panel_width();
    let offset = (j as f64 - j_prime as f64) * h;
    if j != j_prime {
        return Ok(simpson(|x| kernel(n, q, x), offset - 0.5 * h, offset + 0.5 * h, subpanels));
    }
    match n {
        // odd integrand over a symmetric panel
        1 => Ok(Complex64::new(0.0, 0.0)),
        // x = (h/2)t² absorbs the logarithm at the collocation point
        0 => Ok(2.0 * simpson(|t| if t == 0.0 { Complex64::new(0.0, 0.0) } else { kernel(0, q, 0.5 * h * t * t) * (h * t) }, 0.0, 1.0, subpanels)),
        _ => Err(Error::invalid("n", 2.0, "self-panel second-derivative integral is hypersingular")),
    }
}

/// Self-panel I² as 2∫_ε^{h/2} ∂ₓₓ(−2iK₀) dx plus the analytic boundary
/// term 4iQK₁(Qε) that the excluded interval contributes.
pub fn self_panel_second_derivative(q: Complex64, h: f64, epsilon: f64, subpanels: usize) -> Complex64 {
    let inner = simpson(|x| kernel(2, q, x), epsilon, 0.5 * h, subpanels);
    2.0 * inner + 4.0 * I * q * bessel_k_reference(1, q * epsilon)
}
