use crepant::cohomology::{LambdaPair, Space};
use crepant::quantum::{
    diagonal, extraction_stability, frobenius_check, gram, rational_reconstruct, rational_reconstruct_auto,
    structure_constants,
};
use crepant::Error;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(v: f64) -> Complex64 {
    Complex64::from(v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn frobenius_axioms_at_random_lambda(seed in any::<u64>(), n in 2usize..4, y_side in any::<bool>()) {
        let lambda = LambdaPair::sample(&mut ChaCha8Rng::seed_from_u64(seed), 3);
        let side = if y_side { Space::Resolution } else { Space::Orbifold };
        let e = structure_constants(side, n, lambda, 4, 3).unwrap();
        let r = frobenius_check(&e.constants, &gram(side, n, lambda).unwrap()).unwrap();
        prop_assert_eq!(r.commutativity, 0.0);
        prop_assert!(r.unit < 1e-12, "{:?}", r);
        prop_assert!(r.symmetry < 1e-8, "{:?}", r);
        prop_assert!(r.associativity < 1e-8, "{:?}", r);
        prop_assert!(e.qde_residual < 1e-8, "{}", e.qde_residual);
    }
}

#[test]
fn window_growth_does_not_move_constants() {
    let lambda = LambdaPair::real(-0.8, 1.45);
    for n in 2..=3 {
        for side in [Space::Orbifold, Space::Resolution] {
            let s = extraction_stability(side, n, lambda, 4, 3).unwrap();
            assert!(s.drift < 1e-9, "{side:?} n={n}: {s:?}");
        }
    }
}

/// Under `λ ↦ sλ` the entry `c_{ij}^k` at `u = 0` scales by
/// `s^{deg i + deg j − deg k}`; negative degrees must vanish.
#[test]
fn orbifold_products_respect_age_grading() {
    let lambda = LambdaPair::real(0.9, -1.2);
    let s = 2.5;
    for n in 2..=4 {
        let a = structure_constants(Space::Orbifold, n, lambda, 2, 3).unwrap().constants;
        let b = structure_constants(Space::Orbifold, n, lambda.scaled(s), 2, 3).unwrap().constants;
        let deg = |k: usize| i32::from(k > 0);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let d = deg(i) + deg(j) - deg(k);
                    let va = a.entry(i, j, k).constant_term();
                    let vb = b.entry(i, j, k).constant_term();
                    if d < 0 {
                        assert!(va.norm() < 1e-13, "n={n} ({i},{j},{k}) = {va}");
                    } else {
                        assert!((vb - va * s.powi(d)).norm() < 1e-12 * (1.0 + vb.norm()), "n={n} ({i},{j},{k})");
                    }
                }
            }
        }
    }
}

#[test]
fn reconstruction_of_trivial_series() {
    let r = rational_reconstruct(&[c(3.0), c(0.0), c(0.0), c(0.0)], 0, 0).unwrap();
    assert_eq!(r.function.numerator, vec![c(3.0)]);
    let geo = vec![c(1.0); 10];
    let r = rational_reconstruct(&geo, 0, 1).unwrap();
    assert!((r.function.denominator[1] + 1.0).norm() < 1e-15);
    assert_eq!(r.held_out, 8);
    assert!(matches!(rational_reconstruct(&geo, 0, 0), Err(Error::Inconclusive(_))));
    assert!(matches!(rational_reconstruct(&geo[..3], 1, 1), Err(Error::Domain(_))));
}

#[test]
fn n2_square_is_rational_in_q() {
    let lambda = LambdaPair::real(0.7, -1.3);
    let e = structure_constants(Space::Resolution, 2, lambda, 8, 3).unwrap().constants;
    let coeffs = diagonal(e.entry(1, 1, 1));
    let floor = e.max_abs();
    let r = rational_reconstruct_auto(&coeffs, floor).unwrap();
    assert!(r.held_out >= 4, "{r:?}");
    assert_eq!((r.p, r.q), (1, 1));
    assert!(r.validation_defect < 1e-8);
}
