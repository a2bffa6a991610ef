//! Special functions from their defining series and integrals.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

const EULER: f64 = 0.577_215_664_901_532_9;

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            carry += (sum - s) + t;
        } else {
            carry += (t - s) + sum;
        }
        sum = s;
    }
    sum + carry
}

/// K₀ or K₁ from the ascending series with digamma coefficients.
pub fn bessel_k_series(order: u8, z: Complex64) -> Complex64 {
    let quarter = z * z / 4.0;
    let log_half = (z / 2.0).ln();
    // term_k = (z²/4)^k / (k! (k+order)!)
    let mut term = if order == 0 { Complex64::new(1.0, 0.0) } else { z / 2.0 };
    let mut psi_k = -EULER;
    let mut psi_kn = if order == 0 { -EULER } else { 1.0 - EULER };
    let mut i_sum = Complex64::new(0.0, 0.0);
    let mut psi_sum = Complex64::new(0.0, 0.0);
    for k in 0..400 {
        i_sum += term;
        psi_sum += term * (psi_k + psi_kn);
        let kf = k as f64;
        let next = term * quarter / ((kf + 1.0) * (kf + 1.0 + order as f64));
        psi_k += 1.0 / (kf + 1.0);
        psi_kn += 1.0 / (kf + 1.0 + order as f64);
        term = next;
        if term.norm() < 1e-18 * i_sum.norm().max(psi_sum.norm()) && k > 4 {
            break;
        }
    }
    if order == 0 {
        -log_half * i_sum + psi_sum / 2.0
    } else {
        z.inv() + log_half * i_sum - psi_sum / 2.0
    }
}

/// K_ν(z) = ∫₀^∞ e^{−z cosh t} cosh(νt) dt by the trapezoid rule; Re z > 0.
pub fn bessel_k_integral(order: u8, z: Complex64, panels: usize) -> Complex64 {
    let upper = (1.0 + 750.0 / z.re).acosh();
    let h = upper / panels as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    for i in 0..=panels {
        let t = i as f64 * h;
        let w = if i == 0 || i == panels { 0.5 } else { 1.0 };
        sum += (-z * t.cosh()).exp() * (order as f64 * t).cosh() * w;
    }
    sum * h
}

/// K₀, K₁ choosing the series near the imaginary axis and the integral
/// elsewhere.
pub fn bessel_k_reference(order: u8, z: Complex64) -> Complex64 {
    if z.re < 1.0 {
        bessel_k_series(order, z)
    } else {
        bessel_k_integral(order, z, 1000)
    }
}

/// L_ν(z) = Σ (z/2)^{2k+ν+1} / (Γ(k+3/2) Γ(k+ν+3/2)), ν ∈ {−1, 0}, summed
/// through the term ratio.
pub fn struve_l_series(order: i32, z: Complex64, terms: usize) -> Complex64 {
    let half = z / 2.0;
    let sqrt_pi = PI.sqrt();
    let mut term = if order == 0 {
        half / (sqrt_pi / 2.0 * sqrt_pi / 2.0)
    } else {
        Complex64::new(1.0 / (sqrt_pi / 2.0 * sqrt_pi), 0.0)
    };
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..terms {
        sum += term;
        let kf = k as f64;
        term *= half * half / ((kf + 1.5) * (kf + 1.5 + order as f64));
    }
    sum
}

/// L₀(x) = (2/π) ∫₀^{π/2} sinh(x cos θ) dθ by composite Simpson.
pub fn struve_l0_integral(x: f64, panels: usize) -> f64 {
    let n = panels + panels % 2;
    let h = FRAC_PI_2 / n as f64;
    let terms = (0..=n).map(|i| {
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        w * (x * (i as f64 * h).cos()).sinh()
    });
    2.0 / PI * compensated_sum(terms) * h / 3.0
}

/// coth(θ/4π) as cosh/sinh.
pub fn coth_direct(theta: f64) -> f64 {
    let x = theta / (4.0 * PI);
    x.cosh() / x.sinh()
}

/// Laurent series of coth(θ/4π) through x⁷.
pub fn coth_laurent(theta: f64) -> f64 {
    let x = theta / (4.0 * PI);
    let x2 = x * x;
    1.0 / x + x * (1.0 / 3.0 - x2 * (1.0 / 45.0 - x2 * (2.0 / 945.0 - x2 / 4725.0)))
}

pub fn coth_reference(theta: f64) -> f64 {
    if theta < 1e-2 {
        coth_laurent(theta)
    } else {
        coth_direct(theta)
    }
}

/// Complete elliptic integrals K(m), E(m) by the trapezoid rule on their
/// periodic integrands.
pub fn elliptic_reference(m: f64, panels: usize) -> (f64, f64) {
    let h = FRAC_PI_2 / panels as f64;
    let mut k = Vec::with_capacity(panels + 1);
    let mut e = Vec::with_capacity(panels + 1);
    for i in 0..=panels {
        let s = (i as f64 * h).sin();
        let w = if i == 0 || i == panels { 0.5 } else { 1.0 };
        let root = (1.0 - m * s * s).sqrt();
        k.push(w / root);
        e.push(w * root);
    }
    (compensated_sum(k) * h, compensated_sum(e) * h)
}
