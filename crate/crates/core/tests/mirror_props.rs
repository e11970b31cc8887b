use crepant::cohomology::LambdaPair;
use crepant::mirror::gkz::{gkz_residual_x, gkz_residual_y};
use crepant::mirror::{
    change_coordinates, enumerate_effective, flat_coords_x, i_function_x, i_function_y, mirror_map_y, s_series, Chart,
    GkzOperator,
};
use num_complex::Complex64;
use proptest::prelude::*;

#[test]
fn mirror_maps_are_annihilated() {
    for n in 2..=5 {
        let f = flat_coords_x(n, 10).unwrap();
        let g = mirror_map_y(n, 10).unwrap();
        for op in GkzOperator::generators(n, Chart::X).unwrap() {
            for fk in &f {
                assert!(gkz_residual_x(&op, fk).unwrap().relative() < 1e-9);
            }
        }
        for op in GkzOperator::generators(n, Chart::Y).unwrap() {
            for gk in &g {
                assert!(gkz_residual_y(&op, gk).unwrap().relative() < 1e-9);
            }
        }
    }
}

#[test]
fn linear_rows_of_i_functions() {
    let lambda = LambdaPair::real(1.3, -0.45);
    let x0 = Complex64::new(0.25, -0.1);
    for n in 2..=4 {
        let d = 6;
        let ix = i_function_x(n, d, 3, x0, lambda).unwrap();
        let full = ix.with_prefactor();
        let f = flat_coords_x(n, d).unwrap();
        let c0 = full[1][0].coeffs()[0];
        assert!((c0 - x0).norm() < 1e-15);
        assert!((&full[1][0] - &crepant::series::TruncatedSeries::constant(n - 1, d, x0)).max_abs() < 1e-15);
        for k in 1..n {
            assert!((&full[1][k] - &f[k - 1]).max_abs() < 1e-13, "I_X n={n} k={k}");
        }
        let iy = i_function_y(n, d, 3, x0, lambda).unwrap();
        let full = iy.with_prefactor();
        let s = s_series(n, d).unwrap();
        assert!((full[1][0].coeffs()[0] - x0).norm() < 1e-14);
        for k in 1..n {
            assert!((&full[1][k] - &s[k - 1]).max_abs() < 1e-12, "I_Y n={n} k={k}");
        }
    }
}

#[test]
fn age_index_is_weighted_sum_mod_n() {
    for n in 2..=6 {
        for c in enumerate_effective(n, 7).unwrap() {
            let s: usize = c.beta.iter().enumerate().map(|(k, &b)| (k + 1) * b as usize).sum();
            assert_eq!(c.age_index(), s % n, "{:?}", c.beta);
        }
    }
}

/// `C_{ij}`: `log y = C log x`.
fn cmat(m: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|i| {
            (0..m)
                .map(|j| match i.abs_diff(j) {
                    0 => -2.0,
                    1 => 1.0,
                    _ => 0.0,
                })
                .collect()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// The same operator in both charts: equal Euler eigenvalues on every
    /// torus character and equal right-hand monomials.
    #[test]
    fn operators_agree_under_coordinate_change(
        n in 2usize..7,
        xs in prop::collection::vec((0.2..2.0f64, -3.0..3.0f64), 6),
    ) {
        let m = n - 1;
        let c = cmat(m);
        let x: Vec<Complex64> = xs[..m].iter().map(|&(r, t)| Complex64::from_polar(r, t)).collect();
        let y = change_coordinates(&x).unwrap();
        let logx: Vec<Complex64> = x.iter().map(|v| v.ln()).collect();
        let logy: Vec<Complex64> = y.iter().map(|v| v.ln()).collect();
        let ops_x = GkzOperator::generators(n, Chart::X).unwrap();
        let ops_y = GkzOperator::generators(n, Chart::Y).unwrap();
        for (ox, oy) in ops_x.iter().zip(&ops_y) {
            prop_assert_eq!(&ox.exponents, &oy.exponents);
            for j in 0..=n {
                let wx = ox.weights(j);
                let wy = oy.weights(j);
                // x_i ∂/∂x_i = Σ_k C_{ki} y_k ∂/∂y_k, so C w_x = w_y
                let cw: Vec<f64> = (0..m).map(|i| (0..m).map(|k| c[i][k] * wx[k]).sum()).collect();
                for (p, q) in cw.iter().zip(&wy) {
                    prop_assert!((p - q).abs() < 1e-12, "n={n} j={j}: {cw:?} vs {wy:?}");
                }
            }
            // x^{m_x} = y^{m_y} as functions
            let lhs: Complex64 = ox.monomial.iter().zip(&logx).map(|(&e, l)| l * e as f64).sum();
            let rhs: Complex64 = oy.monomial.iter().zip(&logy).map(|(&e, l)| l * e as f64).sum();
            prop_assert!((lhs.exp() - rhs.exp()).norm() <= 1e-10 * lhs.exp().norm());
        }
    }
}
