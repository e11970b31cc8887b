use std::f64::consts::PI;

use crepant::continuation::{root_correspondence, track, PathSpec};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn tracked_roots_stay_on_the_curve() {
    for n in 2..=5 {
        let tr = track(&PathSpec::new(n, 400), true).unwrap();
        for leg in [&tr.leg1, &tr.leg2] {
            assert!(leg.max_residual < 1e-10, "n={n}: {:e}", leg.max_residual);
            assert!(leg.max_arg_jump < PI / 2.0, "n={n}: {}", leg.max_arg_jump);
            for w in leg.steps.windows(2) {
                for (a, b) in w[0].logs.iter().zip(&w[1].logs) {
                    assert!((a.im - b.im).abs() < PI / 2.0);
                }
            }
        }
    }
}

#[test]
fn permutation_is_stable_under_refinement() {
    for n in 2..=5 {
        let sigmas: Vec<Vec<usize>> = [200, 400, 800, 1600]
            .iter()
            .map(|&s| track(&PathSpec::new(n, s), false).unwrap().sigma)
            .collect();
        assert!(sigmas.windows(2).all(|w| w[0] == w[1]), "n={n}: {sigmas:?}");
        assert_eq!(sigmas[0], (0..n).collect::<Vec<_>>());
    }
}

#[test]
fn junction_hand_off_is_exact() {
    for n in 2..=5 {
        for steps in [500, 1000] {
            let tr = track(&PathSpec::new(n, steps), false).unwrap();
            assert!(tr.junction_mismatch < 1e-12, "n={n} steps={steps}: {:e}", tr.junction_mismatch);
        }
    }
}

#[test]
fn root_correspondence_at_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for n in 2..=6 {
        for _ in 0..50 {
            let x: Vec<Complex64> = (0..n - 1)
                .map(|_| Complex64::from_polar(rng.random_range(0.3..3.0), rng.random_range(-PI..PI)))
                .collect();
            let d = root_correspondence(&x).unwrap();
            assert!(d < 1e-10, "n={n} x={x:?}: {d:e}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn correspondence_holds_off_the_unit_torus(
        n in 2usize..8,
        pts in prop::collection::vec((-2.0..2.0f64, -PI..PI), 7),
    ) {
        let x: Vec<Complex64> = pts[..n - 1].iter().map(|&(lr, t)| Complex64::from_polar(lr.exp(), t)).collect();
        let d = root_correspondence(&x).unwrap();
        prop_assert!(d < 1e-9, "{d:e}");
    }
}
