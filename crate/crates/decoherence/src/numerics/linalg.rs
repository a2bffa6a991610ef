use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is singular to working precision at pivot {pivot}")]
    Singular { pivot: usize },
    #[error("system shape is inconsistent: {0}")]
    Shape(&'static str),
}

/// Square complex system with one or more right-hand sides, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseComplexSystem {
    pub dimension: usize,
    pub matrix: Vec<Complex64>,
    pub rhs: Vec<Vec<Complex64>>,
}

impl DenseComplexSystem {
    pub fn new(dimension: usize, matrix: Vec<Complex64>, rhs: Vec<Vec<Complex64>>) -> Result<Self, LinalgError> {
        if dimension == 0 {
            return Err(LinalgError::Shape("dimension must be at least 1"));
        }
        if matrix.len() != dimension * dimension {
            return Err(LinalgError::Shape("matrix is not n×n"));
        }
        if rhs.iter().any(|b| b.len() != dimension) {
            return Err(LinalgError::Shape("right-hand side length differs from n"));
        }
        Ok(Self { dimension, matrix, rhs })
    }
}

/// LU factors with row pivoting, PA = LU.
#[derive(Debug, Clone)]
pub struct LuFactorization {
    n: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
}

impl LuFactorization {
    pub fn new(n: usize, matrix: &[Complex64]) -> Result<Self, LinalgError> {
        if matrix.len() != n * n || n == 0 {
            return Err(LinalgError::Shape("matrix is not n×n"));
        }
        let scale = matrix.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let tiny = scale * f64::EPSILON * 1e-3;
        let mut lu = matrix.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let (piv, size) = (col..n)
                .map(|r| (r, lu[r * n + col].norm()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(size > tiny) || !size.is_finite() {
                return Err(LinalgError::Singular { pivot: col });
            }
            if piv != col {
                for c in 0..n {
                    lu.swap(piv * n + c, col * n + c);
                }
                perm.swap(piv, col);
            }
            let inv = lu[col * n + col].inv();
            for r in col + 1..n {
                let factor = lu[r * n + col] * inv;
                lu[r * n + col] = factor;
                if factor.re == 0.0 && factor.im == 0.0 {
                    continue;
                }
                let (upper, lower) = lu.split_at_mut(r * n);
                let pivot_row = &upper[col * n..col * n + n];
                let row = &mut lower[..n];
                for c in col + 1..n {
                    row[c] -= factor * pivot_row[c];
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            let mut s = x[r];
            for c in 0..r {
                s -= self.lu[r * n + c] * x[c];
            }
            x[r] = s;
        }
        for r in (0..n).rev() {
            let mut s = x[r];
            for c in r + 1..n {
                s -= self.lu[r * n + c] * x[c];
            }
            x[r] = s / self.lu[r * n + r];
        }
        x
    }
}

/// Solves every right-hand side of `system` by LU with partial pivoting.
pub fn solve_dense(system: &DenseComplexSystem) -> Result<Vec<Vec<Complex64>>, LinalgError> {
    let n = system.dimension;
    if system.matrix.len() != n * n || system.rhs.iter().any(|b| b.len() != n) {
        return Err(LinalgError::Shape("matrix or right-hand side has the wrong size"));
    }
    let lu = LuFactorization::new(n, &system.matrix)?;
    Ok(system.rhs.iter().map(|b| lu.solve(b)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identity_returns_rhs() {
        let n = 3;
        let mut m = vec![c(0.0); 9];
        for i in 0..n {
            m[i * n + i] = c(1.0);
        }
        let b = vec![c(1.0), Complex64::new(2.0, -1.0), c(3.0)];
        let sys = DenseComplexSystem::new(n, m, vec![b.clone()]).unwrap();
        assert_eq!(solve_dense(&sys).unwrap()[0], b);
    }

    #[test]
    fn swap_requires_pivoting() {
        let sys = DenseComplexSystem::new(2, vec![c(0.0), c(1.0), c(1.0), c(0.0)], vec![vec![c(4.0), c(7.0)]]).unwrap();
        assert_eq!(solve_dense(&sys).unwrap()[0], vec![c(7.0), c(4.0)]);
    }

    #[test]
    fn singular_reports_pivot() {
        let sys = DenseComplexSystem::new(2, vec![c(1.0), c(2.0), c(2.0), c(4.0)], vec![vec![c(1.0), c(1.0)]]).unwrap();
        assert_eq!(solve_dense(&sys), Err(LinalgError::Singular { pivot: 1 }));
    }
}
