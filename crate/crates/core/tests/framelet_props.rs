use ftnn::framelet::{gram_defect, FilterBank, FrameletSystem};
use ftnn::tensor::{mode3_product, Tensor3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_tensor(rng: &mut ChaCha8Rng, n1: usize, n2: usize, n3: usize) -> Tensor3 {
    Tensor3::from_fn(n1, n2, n3, |_, _, _| rng.random_range(-1.0..1.0))
}

/// Dense oracle built independently of the slice-wise implementation: every
/// level is a product of explicit circulant matrices.
fn dense_oracle(bank: FilterBank, levels: usize, n: usize) -> Vec<Vec<f64>> {
    let filters = bank.filters();
    let circulant = |h: &[f64], d: usize| -> Vec<Vec<f64>> {
        let c = (h.len() - 1) / 2;
        let mut m = vec![vec![0.0; n]; n];
        for (k, row) in m.iter_mut().enumerate() {
            for (t, &ht) in h.iter().enumerate() {
                let idx = (k as isize + d as isize * (t as isize - c as isize)).rem_euclid(n as isize);
                row[idx as usize] += ht;
            }
        }
        m
    };
    let matmul = |a: &Vec<Vec<f64>>, b: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|p| a[i][p] * b[p][j]).sum()).collect())
            .collect()
    };
    let mut low: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    let mut rows = Vec::new();
    for level in 0..levels {
        let d = 1 << level;
        for h in &filters[1..] {
            rows.extend(matmul(&circulant(h, d), &low));
        }
        low = matmul(&circulant(&filters[0], d), &low);
    }
    rows.extend(low);
    rows
}

#[test]
fn dense_matrix_matches_circulant_oracle() {
    for bank in FilterBank::ALL {
        for levels in 1..=3 {
            let sys = FrameletSystem::new_wrapping(bank, levels, 12).unwrap();
            let w = sys.dense_matrix();
            let oracle = dense_oracle(bank, levels, 12);
            assert_eq!(w.rows(), oracle.len());
            for (i, row) in oracle.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    assert!((w[(i, j)] - v).abs() < 1e-15, "{bank} l={levels} ({i},{j})");
                }
            }
        }
    }
}

#[test]
fn analyze_matches_dense_mode3_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for bank in FilterBank::ALL {
        let sys = FrameletSystem::new(bank, 2, 16).unwrap();
        let x = random_tensor(&mut rng, 3, 3, 16);
        let fast = sys.analyze(&x).unwrap();
        let dense = mode3_product(&x, &sys.dense_matrix()).unwrap();
        assert!(fast.max_abs_diff(&dense) < 1e-11, "{bank}");
        let back = sys.synthesize(&fast).unwrap();
        let dense_back = mode3_product(&fast, &sys.dense_matrix().transpose()).unwrap();
        assert!(back.max_abs_diff(&dense_back) < 1e-11, "{bank}");
    }
}

#[test]
fn round_trip_on_seeded_tensors() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for bank in FilterBank::ALL {
        let sys = FrameletSystem::new(bank, 3, 40).unwrap();
        for _ in 0..50 {
            let x = random_tensor(&mut rng, 4, 3, 40);
            let back = sys.synthesize(&sys.analyze(&x).unwrap()).unwrap();
            assert!(back.max_abs_diff(&x) < 1e-10, "{bank}");
        }
    }
}

#[test]
fn analysis_preserves_energy_but_synthesis_is_not_an_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let sys = FrameletSystem::new(FilterBank::Linear, 2, 16).unwrap();
    let x = random_tensor(&mut rng, 3, 2, 16);
    let y = sys.analyze(&x).unwrap();
    assert!((y.fro_norm() - x.fro_norm()).abs() < 1e-10 * x.fro_norm());
    // W Wᵀ is a projection onto the range of W, not the identity
    let z = random_tensor(&mut rng, 3, 2, sys.output_len());
    let zz = sys.analyze(&sys.synthesize(&z).unwrap()).unwrap();
    assert!(zz.max_abs_diff(&z) > 1e-3);
}

#[test]
fn uep_grid_small() {
    for bank in FilterBank::ALL {
        for levels in 1..=3 {
            let sys = FrameletSystem::new_wrapping(bank, levels, 8).unwrap();
            assert!(gram_defect(&sys.dense_matrix()) < 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn adjoint_identity(seed in any::<u64>(), levels in 1usize..4, bank_idx in 0usize..3) {
        let bank = FilterBank::ALL[bank_idx];
        let n = bank.min_signal_len(levels).max(9);
        let sys = FrameletSystem::new(bank, levels, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_tensor(&mut rng, 2, 3, n);
        let y = random_tensor(&mut rng, 2, 3, sys.output_len());
        let lhs = sys.analyze(&x).unwrap().dot(&y).unwrap();
        let rhs = x.dot(&sys.synthesize(&y).unwrap()).unwrap();
        let scale = sys.analyze(&x).unwrap().fro_norm() * y.fro_norm();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * scale.max(1.0));
    }

    #[test]
    fn analysis_is_linear(seed in any::<u64>(), alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
        let sys = FrameletSystem::new(FilterBank::Cubic, 2, 12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_tensor(&mut rng, 2, 2, 12);
        let y = random_tensor(&mut rng, 2, 2, 12);
        let mut combo = x.scale(alpha);
        combo.axpy(beta, &y).unwrap();
        let lhs = sys.analyze(&combo).unwrap();
        let mut rhs = sys.analyze(&x).unwrap().scale(alpha);
        rhs.axpy(beta, &sys.analyze(&y).unwrap()).unwrap();
        let err = lhs.sub(&rhs).unwrap().fro_norm();
        prop_assert!(err <= 1e-10 * rhs.fro_norm().max(1.0));
    }
}
