use crepant::cohomology::{
    cartan_check, omega_class, pairing_preservation, CohomologyClass, FixedPointData, LambdaPair, Space,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn lambda_from_seed(seed: u64, max_n: usize) -> LambdaPair {
    LambdaPair::sample(&mut ChaCha8Rng::seed_from_u64(seed), max_n)
}

#[test]
fn dual_bases() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let lambda = LambdaPair::sample(&mut rng, 8);
        for n in 2..=8 {
            let fp = FixedPointData::new(n, lambda).unwrap();
            let nl = lambda.l1 * lambda.l2 * n as f64;
            let left: Vec<CohomologyClass> = (0..n)
                .map(|k| {
                    let b = CohomologyClass::basis(Space::Resolution, n, k, lambda);
                    if k == 0 {
                        b.scale(nl)
                    } else {
                        b
                    }
                })
                .collect();
            let right: Vec<CohomologyClass> = (0..n)
                .map(|j| {
                    if j == 0 {
                        CohomologyClass::basis(Space::Resolution, n, 0, lambda)
                    } else {
                        omega_class(n, j, lambda).unwrap()
                    }
                })
                .collect();
            for (a, ca) in left.iter().enumerate() {
                for (b, cb) in right.iter().enumerate() {
                    let v = fp.pair_y(ca, cb).unwrap();
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!((v - want).norm() < 1e-12, "n={n} ({a},{b}): {v}");
                }
            }
        }
    }
}

#[test]
fn residue_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let lambda = LambdaPair::sample(&mut rng, 12);
        for n in 2..=12 {
            let fp = FixedPointData::new(n, lambda).unwrap();
            let sum: Complex64 = (0..n).map(|i| fp.euler(i).inv()).sum();
            let want = (lambda.l1 * lambda.l2 * n as f64).inv();
            assert!((sum - want).norm() <= 1e-12 * want.norm(), "n={n}");
            assert!(fp.residue_defect() < 1e-12);
        }
    }
}

#[test]
fn cartan_matrix_is_lambda_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let lambdas: Vec<LambdaPair> = (0..5).map(|_| LambdaPair::sample(&mut rng, 8)).collect();
    for n in 2..=8 {
        let reports: Vec<_> = lambdas.iter().map(|&l| cartan_check(n, l, 1e-10).unwrap()).collect();
        for r in &reports[1..] {
            for (a, b) in r.cartan_matrix.iter().flatten().zip(reports[0].cartan_matrix.iter().flatten()) {
                assert!((a - b).norm() < 1e-10);
            }
        }
    }
}

/// Pairing on `H(𝒳)` summed term by term from the sector pairings.
#[test]
fn orbifold_pairing_by_sectors() {
    let lambda = LambdaPair::real(0.8, -1.7);
    for n in 2..6 {
        let g = crepant::cohomology::gram_x(n, &lambda);
        for i in 0..n {
            for j in 0..n {
                let a = CohomologyClass::basis(Space::Orbifold, n, i, lambda);
                let b = CohomologyClass::basis(Space::Orbifold, n, j, lambda);
                let v = crepant::cohomology::pair_x(&a, &b).unwrap();
                assert_eq!(v, g[(i, j)]);
                let want = if i == 0 && j == 0 {
                    (lambda.l1 * lambda.l2 * n as f64).inv()
                } else if i > 0 && i + j == n {
                    Complex64::from(1.0 / n as f64)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                assert!((v - want).norm() < 1e-14, "n={n} ({i},{j}): {v} vs {want}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn l_adjoint_preserves_pairing(seed in any::<u64>(), n in 2usize..9) {
        let lambda = lambda_from_seed(seed, n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let worst = pairing_preservation(n, lambda, 10, &mut rng).unwrap();
        prop_assert!(worst < 1e-10, "{worst:e}");
    }
}
