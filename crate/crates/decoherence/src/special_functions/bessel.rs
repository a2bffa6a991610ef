use num_complex::Complex64;
use std::f64::consts::PI;

use super::{domain, is_finite, SpecialFunctionError, EULER_GAMMA};

/// Below this modulus K₀, K₁ come from the ascending series; above it from
/// Steed's continued fraction.
const SERIES_RADIUS: f64 = 2.0;
const CF_MAX_ITER: usize = 100_000;

/// Modified Bessel function of the second kind, order 0 or 1, for Re z ≥ 0.
pub fn bessel_k(order: i32, z: Complex64) -> Result<Complex64, SpecialFunctionError> {
    if order != 0 && order != 1 {
        return Err(domain("bessel_k", z, "order must be 0 or 1"));
    }
    let (k0, k1) = bessel_k01(z)?;
    Ok(if order == 0 { k0 } else { k1 })
}

/// Both K₀(z) and K₁(z) from one evaluation.
pub fn bessel_k01(z: Complex64) -> Result<(Complex64, Complex64), SpecialFunctionError> {
    if !is_finite(z) {
        return Err(domain("bessel_k", z, "argument not finite"));
    }
    if z.re == 0.0 && z.im == 0.0 {
        return Err(domain("bessel_k", z, "singular at the origin"));
    }
    if z.re < 0.0 {
        return Err(domain("bessel_k", z, "Re z < 0"));
    }
    if z.im == 0.0 {
        // Keep real inputs on the real axis exactly.
        let (k0, k1) = if z.re <= SERIES_RADIUS {
            k01_series(z)
        } else {
            k01_steed(z)
        };
        return Ok((Complex64::new(k0.re, 0.0), Complex64::new(k1.re, 0.0)));
    }
    if z.norm() <= SERIES_RADIUS {
        Ok(k01_series(z))
    } else if z.im < 0.0 {
        Ok(k01_steed(z))
    } else {
        // K(z̄) = conj K(z); evaluating one half-plane keeps results exactly conjugate.
        let (k0, k1) = k01_steed(z.conj());
        Ok((k0.conj(), k1.conj()))
    }
}

fn k01_series(z: Complex64) -> (Complex64, Complex64) {
    let y = z * z * 0.25;
    let log_half = (z * 0.5).ln();
    // I0, I1 and the digamma-weighted sums share the same power of y.
    let mut term0 = Complex64::new(1.0, 0.0); // y^k / (k!)^2
    let mut term1 = Complex64::new(1.0, 0.0); // y^k / (k!(k+1)!)
    let mut i0 = Complex64::new(0.0, 0.0);
    let mut i1s = Complex64::new(0.0, 0.0);
    let mut s0 = Complex64::new(0.0, 0.0);
    let mut s1 = Complex64::new(0.0, 0.0);
    let mut harmonic = 0.0; // H_k
    for k in 0..60 {
        let kf = k as f64;
        if k > 0 {
            harmonic += 1.0 / kf;
            term0 *= y / (kf * kf);
            term1 *= y / (kf * (kf + 1.0));
        }
        let h_next = harmonic + 1.0 / (kf + 1.0);
        i0 += term0;
        i1s += term1;
        s0 += term0 * harmonic;
        s1 += term1 * (harmonic + h_next - 2.0 * EULER_GAMMA);
        if term0.norm() < 1e-18 * i0.norm() && k > 2 {
            break;
        }
    }
    let k0 = -(log_half + EULER_GAMMA) * i0 + s0;
    let i1 = z * 0.5 * i1s;
    let k1 = z.inv() + log_half * i1 - z * 0.25 * s1;
    (k0, k1)
}

fn k01_steed(z: Complex64) -> (Complex64, Complex64) {
    let one = Complex64::new(1.0, 0.0);
    let a1 = 0.25;
    let mut b = (one + z) * 2.0;
    let mut d = b.inv();
    let mut h = d;
    let mut delh = d;
    let mut q1 = Complex64::new(0.0, 0.0);
    let mut q2 = one;
    let mut q = Complex64::new(a1, 0.0);
    let mut c = a1;
    let mut a = -a1;
    let mut s = one + q * delh;
    for i in 1..CF_MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += qnew * c;
        b += 2.0;
        d = (b + d * a).inv();
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if dels.norm() < 1e-17 * s.norm() {
            break;
        }
    }
    h *= a1;
    let k0 = (PI / (2.0 * z)).sqrt() * (-z).exp() / s;
    let k1 = k0 * (z + 0.5 - h) / z;
    (k0, k1)
}

/// I₀ and I₁ by their large-argument expansion, both exponentials kept.
/// Intended for |z| ≥ 25.
pub(crate) fn bessel_i01(z: Complex64) -> (Complex64, Complex64) {
    let pre = (2.0 * PI * z).sqrt().inv();
    let grow = z.exp() * pre;
    let decay = (-z).exp() * pre;
    let mut out = [Complex64::new(0.0, 0.0); 2];
    for (nu, slot) in out.iter_mut().enumerate() {
        let mu = 4.0 * (nu * nu) as f64;
        let mut ak = Complex64::new(1.0, 0.0);
        let mut dominant = ak;
        let mut recessive = ak;
        let mut last = f64::INFINITY;
        for k in 1..60 {
            let odd = (2 * k - 1) as f64;
            let next = ak * ((mu - odd * odd) / (k as f64 * 8.0)) / z;
            if next.norm() >= last || next.norm() < 1e-18 {
                break;
            }
            last = next.norm();
            ak = next;
            dominant += if k % 2 == 1 { -ak } else { ak };
            recessive += ak;
        }
        let parity = if nu % 2 == 0 { 1.0 } else { -1.0 };
        let value = if z.im > 0.0 {
            grow * dominant + Complex64::new(0.0, parity) * decay * recessive
        } else if z.im < 0.0 {
            grow * dominant - Complex64::new(0.0, parity) * decay * recessive
        } else {
            Complex64::new((grow * dominant).re, 0.0)
        };
        *slot = value;
    }
    (out[0], out[1])
}
