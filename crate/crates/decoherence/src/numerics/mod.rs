//! Quadrature and dense complex linear algebra.

mod gauss;
mod linalg;
mod quadrature;
mod toeplitz;

pub use gauss::gauss_legendre_unit;
pub use linalg::{solve_dense, DenseComplexSystem, LinalgError, LuFactorization};
pub use quadrature::{
    integrate_adaptive, integrate_adaptive_with, integrate_semi_infinite, integrate_semi_infinite_with,
    QuadValue, QuadratureError, QuadratureOptions, QuadratureResult, GK15_POINTS,
};
pub use toeplitz::{Block2, BlockToeplitz, SolveMethod, ToeplitzSolve};
