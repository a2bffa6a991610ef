use num_complex::Complex64;
use std::f64::consts::{FRAC_2_PI, PI};

use super::bessel::{bessel_i01, bessel_k01};
use super::{domain, is_finite, SpecialFunctionError};
use crate::numerics::gauss_legendre_unit;

/// Largest |z| accepted by [`struve_l`].
pub const STRUVE_ARGUMENT_CEILING: f64 = 1.0e8;

/// |z| ≤ 6: ascending series.
const SERIES_RADIUS: f64 = 6.0;
/// 6 < |z| ≤ 25: Gauss–Legendre on the integral representation; beyond: asymptotics.
const ASYMPTOTIC_RADIUS: f64 = 25.0;
const QUADRATURE_NODES: usize = 96;

/// Modified Struve function L₋₁(z) or L₀(z).
///
/// Three regimes: ascending series for |z| ≤ 6, the Poisson-type integral
/// (2/π)∫₀^{π/2} sinh(z cos φ)dφ and its order-one sibling for |z| ≤ 25, and
/// I_ν + M_ν asymptotics beyond 25.
pub fn struve_l(order: i32, z: Complex64) -> Result<Complex64, SpecialFunctionError> {
    if order != 0 && order != -1 {
        return Err(domain("struve_l", z, "order must be -1 or 0"));
    }
    if !is_finite(z) {
        return Err(domain("struve_l", z, "argument not finite"));
    }
    let r = z.norm();
    if r > STRUVE_ARGUMENT_CEILING {
        return Err(domain("struve_l", z, "|z| above implementation ceiling"));
    }
    if r <= SERIES_RADIUS {
        Ok(series(order, z))
    } else if r <= ASYMPTOTIC_RADIUS {
        Ok(integral(order, z))
    } else {
        asymptotic(order, z)
    }
}

fn series(order: i32, z: Complex64) -> Complex64 {
    let nu = order as f64;
    let half = z * 0.5;
    let step = half * half;
    let mut term = if order == 0 {
        z * FRAC_2_PI
    } else {
        Complex64::new(FRAC_2_PI, 0.0)
    };
    let mut sum = term;
    for k in 0..200 {
        let kf = k as f64;
        term *= step / ((kf + 1.5) * (kf + nu + 1.5));
        sum += term;
        if term.norm() <= 1e-18 * sum.norm() {
            break;
        }
    }
    sum
}

fn integral(order: i32, z: Complex64) -> Complex64 {
    let (nodes, weights) = gauss_legendre_unit(QUADRATURE_NODES);
    let half_range = PI / 4.0;
    let mut s0 = Complex64::new(0.0, 0.0);
    let mut s1 = Complex64::new(0.0, 0.0);
    for (x, w) in nodes.iter().zip(weights.iter()) {
        let phi = half_range * (x + 1.0);
        let sh = (z * phi.cos()).sinh() * *w;
        let s = phi.sin();
        s0 += sh;
        s1 += sh * (s * s);
    }
    if order == 0 {
        s0 * (FRAC_2_PI * half_range)
    } else {
        z * s1 * (FRAC_2_PI * half_range) + FRAC_2_PI
    }
}

fn asymptotic(order: i32, z: Complex64) -> Result<Complex64, SpecialFunctionError> {
    if z.re < 0.0 {
        // L₀ is odd, L₋₁ is even.
        let v = asymptotic(order, -z)?;
        return Ok(if order == 0 { -v } else { v });
    }
    if z.im > 0.0 {
        return Ok(asymptotic(order, z.conj())?.conj());
    }
    if z.re - 0.5 * (2.0 * PI * z.norm()).ln() > 709.0 {
        return Err(SpecialFunctionError::Overflow {
            function: "struve_l",
            argument: z,
        });
    }
    let (i0, i1) = bessel_i01(z);
    let m = struve_m_asymptotic(order, z);
    if z.im == 0.0 {
        let i = if order == 0 { i0 } else { i1 };
        return Ok(Complex64::new((i + m).re, 0.0));
    }
    let (k0, k1) = bessel_k01(z)?;
    let stokes = Complex64::new(0.0, FRAC_2_PI);
    Ok(if order == 0 {
        i0 + m + stokes * k0
    } else {
        i1 + m - stokes * k1
    })
}

/// Algebraic large-|z| expansion of M_ν(z) = L_ν(z) − I_ν(z), ν ∈ {−1, 0},
/// summed to its smallest term.
pub fn struve_m_asymptotic(order: i32, z: Complex64) -> Complex64 {
    let nu = order as f64;
    let half = z * 0.5;
    let inv_sq = (half * half).inv();
    let mut coeff = if order == 0 { 1.0 } else { -0.5 };
    let mut power = half.powf(nu - 1.0);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut sign = -1.0;
    let mut last = f64::INFINITY;
    for k in 0..200 {
        let term = power * (sign * coeff);
        let size = term.norm();
        if size >= last {
            break;
        }
        sum += term;
        if size <= 1e-18 * sum.norm() {
            break;
        }
        last = size;
        let kf = k as f64;
        coeff *= (kf + 0.5) * (nu - 0.5 - kf);
        power *= inv_sq;
        sign = -sign;
    }
    sum / PI
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn reference_values_on_real_axis() {
        let cases = [
            (0, 2.0, 1.937_433_757_991_445_7),
            (-1, 2.0, 1.739_379_559_735_297_2),
            (0, 10.0, 2_815.652_249_374_594_9),
            (-1, 10.0, 2_670.994_904_980_850_6),
            (0, 40.0, 1.489_477_479_341_990_0e16),
            (-1, 40.0, 1.470_739_616_325_935_3e16),
        ];
        for (nu, x, want) in cases {
            let got = struve_l(nu, Complex64::new(x, 0.0)).unwrap();
            assert!((got.re - want).abs() / want < 1e-12, "L{nu}({x}) = {got}");
            assert_eq!(got.im, 0.0);
        }
    }

    #[test]
    fn regimes_overlap_across_the_complex_plane() {
        for ang in [0.0, -0.3, -0.8, -1.2, -1.5, -PI / 2.0, 0.7, PI / 2.0] {
            for nu in [0, -1] {
                let z = Complex64::from_polar(SERIES_RADIUS, ang);
                assert!(rel(series(nu, z), integral(nu, z)) < 1e-12, "series/integral {nu} {z}");
                let z = Complex64::from_polar(ASYMPTOTIC_RADIUS, ang);
                let a = asymptotic(nu, z).unwrap();
                let b = integral(nu, z);
                assert!(rel(a, b) < 1e-9, "integral/asymptotic {nu} {z}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn imaginary_axis_matches_struve_h() {
        // L0(-iq) = -i H0(q); L-1(-iq) = 2/π - H1(q)
        let cases = [
            (3.0, 0.574_306_148_814_398_4, 1.020_109_569_186_450_4),
            (15.0, 0.247_723_830_981_151_24, 0.660_487_298_511_965_97),
            (60.0, 0.057_966_341_752_945_183, 0.728_666_073_805_573_58),
        ];
        for (q, h0, h1) in cases {
            let z = Complex64::new(0.0, -q);
            let l0 = struve_l(0, z).unwrap();
            let lm1 = struve_l(-1, z).unwrap();
            assert!(rel(l0, Complex64::new(0.0, -h0)) < 1e-9, "L0(-i{q}) = {l0}");
            assert!(rel(lm1, Complex64::new(FRAC_2_PI - h1, 0.0)) < 1e-9, "L-1(-i{q}) = {lm1}");
        }
    }

    #[test]
    fn overflow_reported() {
        assert!(matches!(
            struve_l(0, Complex64::new(800.0, 0.0)),
            Err(SpecialFunctionError::Overflow { .. })
        ));
    }
}
