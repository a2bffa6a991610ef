use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

use super::{domain, SpecialFunctionError};

/// Complete elliptic integrals 𝒦(m) and ℰ(m) for parameter m ≤ 0.
///
/// Parameter convention: 𝒦(m) = ∫₀^{π/2} dφ / √(1 − m sin²φ). Negative m is
/// mapped to m/(m−1) ∈ [0, 1) by the imaginary-modulus transformation and the
/// result evaluated by the arithmetic–geometric mean.
pub fn elliptic_km_em(m: f64) -> Result<(f64, f64), SpecialFunctionError> {
    if !(m <= 0.0) || !m.is_finite() {
        return Err(domain("elliptic_km_em", Complex64::new(m, 0.0), "parameter must be finite and ≤ 0"));
    }
    let scale = (1.0 - m).sqrt();
    let mapped = m / (m - 1.0);
    // √(1 − mapped) = 1/√(1 − m) exactly; avoids forming 1 − mapped.
    let (k, e) = agm_ke(mapped, 1.0 / scale);
    Ok((k / scale, e * scale))
}

/// 𝒦 and ℰ for m ∈ [0, 1) given the complementary modulus √(1−m).
pub(crate) fn agm_ke(m: f64, complementary: f64) -> (f64, f64) {
    let mut a = 1.0;
    let mut b = complementary;
    let mut sum = 0.5 * m;
    let mut weight = 0.5;
    for _ in 0..64 {
        let c = 0.5 * (a - b);
        if c.abs() <= f64::EPSILON * a {
            break;
        }
        weight *= 2.0;
        sum += weight * c * c;
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    let k = FRAC_PI_2 / a;
    (k, k * (1.0 - sum))
}
