use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

use super::linalg::{LinalgError, LuFactorization};

type Vec2 = [Complex64; 2];

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Levinson results with a larger relative residual than this are refined
/// against a compensated residual; anything still above `ACCEPT_RESIDUAL`
/// goes to dense LU.
const REFINE_RESIDUAL: f64 = 1e-11;
const ACCEPT_RESIDUAL: f64 = 1e-10;
/// Refinement stops once the residual is this small.
const TARGET_RESIDUAL: f64 = 1e-14;
const MAX_REFINEMENTS: usize = 8;

/// 2×2 complex block, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block2(pub [[Complex64; 2]; 2]);

impl Block2 {
    pub const ZERO: Block2 = Block2([[ZERO, ZERO], [ZERO, ZERO]]);
    pub const IDENTITY: Block2 = Block2([[ONE, ZERO], [ZERO, ONE]]);

    pub fn inverse(&self) -> Option<Block2> {
        let [[a, b], [c, d]] = self.0;
        let det = a * d - b * c;
        let scale = a.norm().max(b.norm()).max(c.norm()).max(d.norm());
        if !(det.norm() > scale * scale * 1e-300) || !det.re.is_finite() || !det.im.is_finite() {
            return None;
        }
        let inv = det.inv();
        Some(Block2([[d * inv, -b * inv], [-c * inv, a * inv]]))
    }

    #[inline]
    pub fn apply(&self, v: Vec2) -> Vec2 {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    fn row_sum_norm(&self) -> f64 {
        let m = &self.0;
        (m[0][0].norm() + m[0][1].norm()).max(m[1][0].norm() + m[1][1].norm())
    }
}

impl Mul for Block2 {
    type Output = Block2;
    #[inline]
    fn mul(self, o: Block2) -> Block2 {
        let a = &self.0;
        let b = &o.0;
        Block2([
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ])
    }
}

impl Add for Block2 {
    type Output = Block2;
    #[inline]
    fn add(self, o: Block2) -> Block2 {
        let (a, b) = (self.0, o.0);
        Block2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Block2 {
    type Output = Block2;
    #[inline]
    fn sub(self, o: Block2) -> Block2 {
        self + (-o)
    }
}

impl Neg for Block2 {
    type Output = Block2;
    #[inline]
    fn neg(self) -> Block2 {
        let a = self.0;
        Block2([[-a[0][0], -a[0][1]], [-a[1][0], -a[1][1]]])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Levinson,
    LevinsonRefined,
    DenseLu,
}

/// Solution carried as an unevaluated sum `solution + correction`. The
/// correction holds the low-order bits gained by compensated refinement and
/// is zero for well-conditioned systems.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzSolve {
    pub solution: Vec<Vec2>,
    pub correction: Vec<Vec2>,
    /// ‖A x − b‖∞ / ‖b‖∞ for x = solution + correction, accumulated in
    /// compensated arithmetic.
    pub residual: f64,
    pub method: SolveMethod,
}

/// Block-Toeplitz matrix with 2×2 blocks: entry (j, j′) is T_{j−j′}.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockToeplitz {
    n: usize,
    blocks: Vec<Block2>,
}

impl BlockToeplitz {
    /// `blocks[d + n − 1]` holds T_d for d = −(n−1) … n−1.
    pub fn new(n: usize, blocks: Vec<Block2>) -> Result<Self, LinalgError> {
        if n == 0 || blocks.len() != 2 * n - 1 {
            return Err(LinalgError::Shape("block Toeplitz needs 2n−1 distinct blocks"));
        }
        Ok(Self { n, blocks })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn block(&self, d: isize) -> Block2 {
        self.blocks[(d + self.n as isize - 1) as usize]
    }

    pub fn get(&self, j: usize, jp: usize) -> Block2 {
        self.block(j as isize - jp as isize)
    }

    /// Dense 2n×2n row-major expansion; component c of panel j sits at 2j + c.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let m = 2 * self.n;
        let mut out = vec![ZERO; m * m];
        for j in 0..self.n {
            for jp in 0..self.n {
                let b = self.get(j, jp).0;
                for r in 0..2 {
                    for c in 0..2 {
                        out[(2 * j + r) * m + 2 * jp + c] = b[r][c];
                    }
                }
            }
        }
        out
    }

    pub fn apply(&self, x: &[Vec2]) -> Vec<Vec2> {
        (0..self.n)
            .map(|j| {
                let mut acc = [ZERO, ZERO];
                for (jp, v) in x.iter().enumerate() {
                    let y = self.get(j, jp).apply(*v);
                    acc[0] += y[0];
                    acc[1] += y[1];
                }
                acc
            })
            .collect()
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|jp| self.get(j, jp).row_sum_norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// ‖b − Ax‖∞/‖b‖∞ in working precision.
    fn residual_plain(&self, x: &[Vec2], rhs: &[Vec2]) -> f64 {
        let ax = self.apply(x);
        let worst = rhs
            .iter()
            .zip(ax)
            .fold(0.0f64, |m, (b, a)| m.max((b[0] - a[0]).norm()).max((b[1] - a[1]).norm()));
        worst / inf_norm(rhs).max(f64::MIN_POSITIVE)
    }

    /// b − A(x_hi + x_lo) with every product and sum kept to twice the
    /// working precision, rounded once at the end.
    fn residual_compensated(&self, hi: &[Vec2], lo: &[Vec2], rhs: &[Vec2]) -> (Vec<Vec2>, f64) {
        let n = self.n;
        let r: Vec<Vec2> = (0..n)
            .map(|j| {
                let mut acc = [
                    [Compensated::new(rhs[j][0].re), Compensated::new(rhs[j][0].im)],
                    [Compensated::new(rhs[j][1].re), Compensated::new(rhs[j][1].im)],
                ];
                for jp in 0..n {
                    let blk = self.get(j, jp).0;
                    for (row, acc_row) in blk.iter().zip(acc.iter_mut()) {
                        for c in 0..2 {
                            let a = row[c];
                            let (xh, xl) = (hi[jp][c], lo[jp][c]);
                            acc_row[0].sub_product(a.re, xh.re, xl.re);
                            acc_row[0].add_product(a.im, xh.im, xl.im);
                            acc_row[1].sub_product(a.re, xh.im, xl.im);
                            acc_row[1].sub_product(a.im, xh.re, xl.re);
                        }
                    }
                }
                [
                    Complex64::new(acc[0][0].value(), acc[0][1].value()),
                    Complex64::new(acc[1][0].value(), acc[1][1].value()),
                ]
            })
            .collect();
        let norm = inf_norm(&r) / inf_norm(rhs).max(f64::MIN_POSITIVE);
        (r, norm)
    }

    /// Block Levinson recursion, O(n²); `None` on breakdown of a leading block.
    pub fn levinson(&self, rhs: &[Vec2]) -> Option<Vec<Vec2>> {
        let n = self.n;
        let t0inv = self.block(0).inverse()?;
        let mut f = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        let mut x = Vec::with_capacity(n);
        f.push(t0inv);
        b.push(t0inv);
        x.push(t0inv.apply(rhs[0]));
        for k in 1..n {
            let mut eps_f = Block2::ZERO;
            let mut eps_b = Block2::ZERO;
            let mut theta = [ZERO, ZERO];
            for i in 0..k {
                let t_fwd = self.block((k - i) as isize);
                eps_f = eps_f + t_fwd * f[i];
                eps_b = eps_b + self.block(-1 - i as isize) * b[i];
                let y = t_fwd.apply(x[i]);
                theta[0] += y[0];
                theta[1] += y[1];
            }
            let delta = (Block2::IDENTITY - eps_f * eps_b).inverse()?;
            let gamma = -(eps_b * delta);
            let r = [rhs[k][0] - theta[0], rhs[k][1] - theta[1]];
            // The last step needs only the backward vector.
            let forward = if k + 1 < n {
                let alpha = (Block2::IDENTITY - eps_b * eps_f).inverse()?;
                f.push(Block2::ZERO);
                Some((alpha, -(eps_f * alpha)))
            } else {
                None
            };
            b.push(Block2::ZERO);
            for i in (0..=k).rev() {
                let fi = if i < k { f[i] } else { Block2::ZERO };
                let prev = if i > 0 { b[i - 1] } else { Block2::ZERO };
                if let Some((alpha, beta)) = forward {
                    f[i] = fi * alpha + prev * beta;
                }
                b[i] = fi * gamma + prev * delta;
            }
            x.push([ZERO, ZERO]);
            for (xi, bi) in x.iter_mut().zip(b.iter()) {
                let y = bi.apply(r);
                xi[0] += y[0];
                xi[1] += y[1];
            }
        }
        Some(x)
    }

    /// Power-of-two row and column scales that bring every component of the
    /// blocks to unit size. They are exact in floating point.
    fn equilibration(&self) -> ([f64; 2], [f64; 2]) {
        let pow2 = |m: f64| if m > 0.0 && m.is_finite() { (-m.log2().round()).exp2() } else { 1.0 };
        let mut rows = [0.0f64; 2];
        for b in &self.blocks {
            for (r, row) in b.0.iter().enumerate() {
                rows[r] = rows[r].max(row[0].norm()).max(row[1].norm());
            }
        }
        let rs = [pow2(rows[0]), pow2(rows[1])];
        let mut cols = [0.0f64; 2];
        for b in &self.blocks {
            for r in 0..2 {
                for c in 0..2 {
                    cols[c] = cols[c].max(b.0[r][c].norm() * rs[r]);
                }
            }
        }
        (rs, [pow2(cols[0]), pow2(cols[1])])
    }

    fn scaled(&self, rs: [f64; 2], cs: [f64; 2]) -> Self {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let mut m = b.0;
                for (r, row) in m.iter_mut().enumerate() {
                    for (c, v) in row.iter_mut().enumerate() {
                        *v *= rs[r] * cs[c];
                    }
                }
                Block2(m)
            })
            .collect();
        Self { n: self.n, blocks }
    }

    /// Equilibrated Levinson with residual check, compensated iterative
    /// refinement, and a dense LU fallback. The residual refers to the
    /// original, unscaled system.
    pub fn solve(&self, rhs: &[Vec2]) -> Result<ToeplitzSolve, LinalgError> {
        if rhs.len() != self.n {
            return Err(LinalgError::Shape("right-hand side length differs from n"));
        }
        let (rs, cs) = self.equilibration();
        let t = self.scaled(rs, cs);
        let row_scale = |v: &[Vec2]| -> Vec<Vec2> { v.iter().map(|c| [c[0] * rs[0], c[1] * rs[1]]).collect() };
        let col_scale = |v: &[Vec2]| -> Vec<Vec2> { v.iter().map(|c| [c[0] * cs[0], c[1] * cs[1]]).collect() };

        if let Some(y) = t.levinson(&row_scale(rhs)) {
            let x = col_scale(&y);
            let lo = vec![[ZERO, ZERO]; self.n];
            let plain = self.residual_plain(&x, rhs);
            if plain.is_finite() && plain <= 0.1 * REFINE_RESIDUAL {
                return Ok(ToeplitzSolve {
                    solution: x,
                    correction: lo,
                    residual: plain,
                    method: SolveMethod::Levinson,
                });
            }
            let (r, residual) = self.residual_compensated(&x, &lo, rhs);
            if residual.is_finite() && residual <= REFINE_RESIDUAL {
                return Ok(ToeplitzSolve {
                    solution: x,
                    correction: lo,
                    residual,
                    method: SolveMethod::Levinson,
                });
            }
            let refined = self.refine(x, lo, r, residual, rhs, |r| t.levinson(&row_scale(r)).map(|d| col_scale(&d)));
            if refined.residual.is_finite() && refined.residual <= ACCEPT_RESIDUAL {
                return Ok(ToeplitzSolve {
                    method: SolveMethod::LevinsonRefined,
                    ..refined
                });
            }
        }
        let lu = LuFactorization::new(2 * self.n, &t.to_dense())?;
        let lu_solve = |r: &[Vec2]| -> Option<Vec<Vec2>> {
            let flat: Vec<Complex64> = row_scale(r).iter().flat_map(|c| c.iter().copied()).collect();
            let y: Vec<Vec2> = lu.solve(&flat).chunks(2).map(|c| [c[0], c[1]]).collect();
            Some(col_scale(&y))
        };
        let x = lu_solve(rhs).expect("dense solve always returns");
        let lo = vec![[ZERO, ZERO]; self.n];
        let (r, residual) = self.residual_compensated(&x, &lo, rhs);
        let refined = self.refine(x, lo, r, residual, rhs, lu_solve);
        Ok(ToeplitzSolve {
            method: SolveMethod::DenseLu,
            ..refined
        })
    }

    /// Iterative refinement x ← x + M r, with x kept as a two-term sum and r
    /// from [`Self::residual_compensated`]. Keeps the best iterate.
    fn refine<M>(&self, hi: Vec<Vec2>, lo: Vec<Vec2>, r: Vec<Vec2>, residual: f64, rhs: &[Vec2], mut corrector: M) -> ToeplitzSolve
    where
        M: FnMut(&[Vec2]) -> Option<Vec<Vec2>>,
    {
        let mut best = ToeplitzSolve {
            solution: hi,
            correction: lo,
            residual,
            method: SolveMethod::LevinsonRefined,
        };
        let mut r = r;
        for _ in 0..MAX_REFINEMENTS {
            if !(best.residual > TARGET_RESIDUAL) {
                break;
            }
            let Some(d) = corrector(&r) else { break };
            let mut hi = best.solution.clone();
            let mut lo = best.correction.clone();
            for ((h, l), dv) in hi.iter_mut().zip(lo.iter_mut()).zip(&d) {
                for c in 0..2 {
                    let (re, re_err) = two_sum(h[c].re, dv[c].re);
                    let (im, im_err) = two_sum(h[c].im, dv[c].im);
                    let low = Complex64::new(l[c].re + re_err, l[c].im + im_err);
                    let (re, re_lo) = fast_two_sum(re, low.re);
                    let (im, im_lo) = fast_two_sum(im, low.im);
                    h[c] = Complex64::new(re, im);
                    l[c] = Complex64::new(re_lo, im_lo);
                }
            }
            let (r_new, res_new) = self.residual_compensated(&hi, &lo, rhs);
            if !(res_new < best.residual) {
                break;
            }
            best.solution = hi;
            best.correction = lo;
            best.residual = res_new;
            r = r_new;
        }
        best
    }
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn fast_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    if a.abs() >= b.abs() {
        (s, b - (s - a))
    } else {
        (s, a - (s - b))
    }
}

/// Running sum carried as value + error term.
#[derive(Clone, Copy)]
struct Compensated {
    hi: f64,
    lo: f64,
}

impl Compensated {
    fn new(v: f64) -> Self {
        Self { hi: v, lo: 0.0 }
    }

    /// self += a (x_hi + x_lo)
    #[inline]
    fn add_product(&mut self, a: f64, x_hi: f64, x_lo: f64) {
        let p = a * x_hi;
        let p_err = a.mul_add(x_hi, -p);
        let (s, s_err) = two_sum(self.hi, p);
        self.hi = s;
        self.lo += p_err + s_err + a * x_lo;
    }

    #[inline]
    fn sub_product(&mut self, a: f64, x_hi: f64, x_lo: f64) {
        self.add_product(-a, x_hi, x_lo);
    }

    fn value(&self) -> f64 {
        self.hi + self.lo
    }
}

fn inf_norm(v: &[Vec2]) -> f64 {
    v.iter().fold(0.0, |m, c| m.max(c[0].norm()).max(c[1].norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_block(rng: &mut ChaCha8Rng, scale: f64) -> Block2 {
        let mut c = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale;
        Block2([[c(), c()], [c(), c()]])
    }

    #[test]
    fn levinson_matches_dense_lu() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 5, 17] {
            let mut blocks: Vec<Block2> = (0..2 * n - 1).map(|_| random_block(&mut rng, 0.3)).collect();
            blocks[n - 1] = blocks[n - 1] + Block2::IDENTITY * Block2([[Complex64::new(3.0, 0.5), ZERO], [ZERO, Complex64::new(2.0, -1.0)]]);
            let t = BlockToeplitz::new(n, blocks).unwrap();
            let rhs: Vec<Vec2> = (0..n)
                .map(|_| [Complex64::new(rng.gen(), rng.gen()), Complex64::new(rng.gen(), rng.gen())])
                .collect();
            let x = t.levinson(&rhs).unwrap();
            let lu = LuFactorization::new(2 * n, &t.to_dense()).unwrap();
            let flat: Vec<Complex64> = rhs.iter().flat_map(|v| v.iter().copied()).collect();
            let y = lu.solve(&flat);
            for (i, xi) in x.iter().enumerate() {
                assert!((xi[0] - y[2 * i]).norm() < 1e-12 && (xi[1] - y[2 * i + 1]).norm() < 1e-12);
            }
            let s = t.solve(&rhs).unwrap();
            assert!(s.residual < 1e-13);
        }
    }

    #[test]
    fn falls_back_when_leading_block_is_singular() {
        let n = 3;
        let mut blocks = vec![Block2::ZERO; 2 * n - 1];
        blocks[n - 1] = Block2([[ZERO, ONE], [ZERO, ZERO]]);
        blocks[n] = Block2::IDENTITY;
        blocks[n - 2] = Block2::IDENTITY;
        blocks[n + 1] = Block2([[ONE, ZERO], [ZERO, Complex64::new(2.0, 0.0)]]);
        blocks[n - 3] = Block2([[Complex64::new(0.5, 0.0), ZERO], [ONE, ONE]]);
        let t = BlockToeplitz::new(n, blocks).unwrap();
        let rhs = vec![[ONE, ZERO], [ZERO, ONE], [ONE, ONE]];
        let s = t.solve(&rhs).unwrap();
        assert_eq!(s.method, SolveMethod::DenseLu);
        assert!(s.residual < 1e-12);
    }
}
