//! Closed-form half-plane kernels for the ribbon's W → ∞ limit.
//!
//! Both are normalized like 2/κ times the ribbon's projected current, with
//! the conductor on x < 0.

use std::f64::consts::PI;

use num_complex::Complex64;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlaneKernels {
    /// From the Wiener–Hopf current with the |x|^{−1/2} edge behavior in J_x.
    pub singular_edge: Complex64,
    /// From the Wiener–Hopf current whose normal component vanishes at the edge.
    pub regular_edge: Complex64,
}

/// Kernels at wavenumber k and k_y = μk for speed β.
pub fn half_plane_kernels(k: f64, mu: f64, beta: f64) -> HalfPlaneKernels {
    let gamma = 1.0 / (1.0 - beta * beta).sqrt();
    let ky = k * mu;
    let kappa = ((k / (beta * gamma)).powi(2) + ky * ky).sqrt();
    let big_k = Complex64::new(k * k - ky * ky, 0.0).sqrt();
    let ik = I * kappa;
    let root = (big_k + ik).sqrt();
    let c_a = (kappa * kappa - ky * ky) / (2.0 * PI * kappa);
    let c_2 = -ky / (2.0 * PI * kappa);
    let rho0 = ky * c_2 * root / (ik * big_k * big_k.sqrt());
    let e = big_k.sqrt() * rho0 - c_a / (ik * root);
    // evaluated at k_x = iκ
    let kx = ik;
    let rho = (c_a / ((kx + ik) * root) + e) / (big_k + kx).sqrt();
    let jy = (ky * rho + c_2 * root * (big_k + kx).sqrt() / (kx + ik)) / (k * k);
    let jx = (rho - ky * jy) / kx;
    let regular_edge = jx - I * (ky / kappa) * jy;
    let jp = I * beta * beta / (2.0 * PI * k * k) * root * (big_k + kx).sqrt() / (kx + ik);
    let singular_edge = jp * (1.0 + ky * ky / (kappa * kappa));
    HalfPlaneKernels {
        singular_edge,
        regular_edge,
    }
}
