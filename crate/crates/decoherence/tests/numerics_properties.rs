use decoherence::numerics::{integrate_adaptive, solve_dense, Block2, BlockToeplitz, DenseComplexSystem};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Diagonally dominant 2×2-block Toeplitz matrix.
fn random_toeplitz(n: usize, seed: u64) -> BlockToeplitz {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blocks = (0..2 * n - 1)
        .map(|d| {
            let mut b = [[c(&mut rng), c(&mut rng)], [c(&mut rng), c(&mut rng)]];
            if d == n - 1 {
                b[0][0] += 4.0 * n as f64;
                b[1][1] += 4.0 * n as f64;
            }
            Block2(b)
        })
        .collect();
    BlockToeplitz::new(n, blocks).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn splitting_the_interval_is_additive(a in -3.0f64..0.0, b in 0.5f64..4.0, t in 0.1f64..0.9, w in 0.1f64..5.0) {
        let f = |x: f64| (w * x).sin() * (-x * x / 4.0).exp() + x.powi(3);
        let whole = integrate_adaptive(f, a, b, 1e-12, 1e-14, &[]).unwrap().value;
        let mid = a + t * (b - a);
        let left = integrate_adaptive(f, a, mid, 1e-12, 1e-14, &[]).unwrap().value;
        let right = integrate_adaptive(f, mid, b, 1e-12, 1e-14, &[]).unwrap().value;
        prop_assert!((whole - left - right).abs() <= 1e-11 * (1.0 + whole.abs()));
    }

    #[test]
    fn row_permutation_leaves_the_solution(n in 1usize..12, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m: Vec<Complex64> = (0..n * n).map(|_| c(&mut rng)).collect();
        let b: Vec<Complex64> = (0..n).map(|_| c(&mut rng)).collect();
        let x = solve_dense(&DenseComplexSystem::new(n, m.clone(), vec![b.clone()]).unwrap());
        prop_assume!(x.is_ok());
        let x = x.unwrap();
        let perm: Vec<usize> = (0..n).rev().collect();
        let pm: Vec<Complex64> = perm.iter().flat_map(|&r| m[r * n..(r + 1) * n].to_vec()).collect();
        let pb: Vec<Complex64> = perm.iter().map(|&r| b[r]).collect();
        let y = solve_dense(&DenseComplexSystem::new(n, pm, vec![pb]).unwrap()).unwrap();
        let scale = x[0].iter().fold(1.0f64, |s, v| s.max(v.norm()));
        for (u, v) in x[0].iter().zip(&y[0]) {
            prop_assert!((u - v).norm() <= 1e-9 * scale);
        }
    }

    #[test]
    fn toeplitz_solver_matches_dense_elimination(n in 1usize..16, seed in any::<u64>()) {
        let t = random_toeplitz(n, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let rhs: Vec<[Complex64; 2]> = (0..n).map(|_| [c(&mut rng), c(&mut rng)]).collect();
        let fast = t.solve(&rhs).unwrap();
        prop_assert!(fast.residual <= 1e-12);
        let flat: Vec<Complex64> = rhs.iter().flat_map(|v| v.to_vec()).collect();
        let dense = solve_dense(&DenseComplexSystem::new(2 * n, t.to_dense(), vec![flat]).unwrap()).unwrap();
        for (j, v) in fast.solution.iter().enumerate() {
            for k in 0..2 {
                let x = v[k] + fast.correction[j][k];
                prop_assert!((x - dense[0][2 * j + k]).norm() <= 1e-10);
            }
        }
    }
}

#[test]
fn dense_expansion_is_constant_along_block_diagonals() {
    let n = 6;
    let t = random_toeplitz(n, 7);
    let m = t.to_dense();
    for j in 1..n {
        for jp in 1..n {
            for r in 0..2 {
                for c in 0..2 {
                    let here = m[(2 * j + r) * 2 * n + 2 * jp + c];
                    let prev = m[(2 * (j - 1) + r) * 2 * n + 2 * (jp - 1) + c];
                    assert_eq!(here, prev);
                }
            }
        }
    }
}
