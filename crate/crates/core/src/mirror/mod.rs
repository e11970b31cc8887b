//! Effective classes, the I-functions of `𝒳` and `Y`, their flat
//! coordinates, and the coordinate change between the two charts of the
//! B-model moduli space.
//!
//! `I`-functions are stored as a window of rows `z^1, z^0, …, z^{−Z}`, each
//! row a length-`n` vector of power series in `x₁…x_{n−1}` (or
//! `y₁…y_{n−1}`). The prefactor `e^{x₀/z}` is not expanded into the rows;
//! `x₀` is kept alongside. On the `Y` side the multivalued factor
//! `y^{γ/z}` is also left out, so the rows are single-valued.

pub mod gkz;
pub mod zwindow;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cohomology::{FixedPointData, LambdaPair, Space};
use crate::error::{Error, Result};
use crate::series::{reciprocal_gamma, MonomialBasis, TruncatedSeries};

pub use gkz::{Chart, GkzOperator, GkzResidual, PfResidual};
pub use zwindow::ZWindow;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn check_rank(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!("rank n = {n}, need n ≥ 2")));
    }
    Ok(())
}

/// An effective class `β̂ = (β̂(1), …, β̂(n−1))` of the orbifold.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EffectiveClass {
    pub n: usize,
    pub beta: Vec<u32>,
}

impl EffectiveClass {
    pub fn new(n: usize, beta: Vec<u32>) -> Result<Self> {
        check_rank(n)?;
        if beta.len() != n - 1 {
            return Err(Error::Shape(format!(
                "class of length {} at rank {n}",
                beta.len()
            )));
        }
        Ok(EffectiveClass { n, beta })
    }

    pub fn total(&self) -> u32 {
        self.beta.iter().sum()
    }

    /// `n·β̂(0) = −Σ(n−k)β̂(k)`.
    pub fn beta0_scaled(&self) -> i64 {
        -self
            .beta
            .iter()
            .enumerate()
            .map(|(i, &b)| (self.n - i - 1) as i64 * b as i64)
            .sum::<i64>()
    }

    /// `n·β̂(n) = −Σ kβ̂(k)`.
    pub fn betan_scaled(&self) -> i64 {
        -self
            .beta
            .iter()
            .enumerate()
            .map(|(i, &b)| (i + 1) as i64 * b as i64)
            .sum::<i64>()
    }

    pub fn beta0(&self) -> f64 {
        self.beta0_scaled() as f64 / self.n as f64
    }

    pub fn betan(&self) -> f64 {
        self.betan_scaled() as f64 / self.n as f64
    }

    /// `i(β̂) = n·⟨−β̂(n)⟩`, i.e. `Σ kβ̂(k) mod n`.
    pub fn age_index(&self) -> usize {
        (-self.betan_scaled()).rem_euclid(self.n as i64) as usize
    }

    pub fn factorial(&self) -> f64 {
        self.beta.iter().map(|&b| factorial(b as usize)).product()
    }
}

fn factorial(k: usize) -> f64 {
    (2..=k).map(|v| v as f64).product()
}

/// All effective classes with `Σβ̂(k) ≤ degree`, in graded-lex order.
pub fn enumerate_effective(n: usize, degree: usize) -> Result<Vec<EffectiveClass>> {
    check_rank(n)?;
    let basis = MonomialBasis::shared(n - 1, degree);
    Ok(basis
        .all_exponents()
        .iter()
        .map(|e| EffectiveClass {
            n,
            beta: e.clone(),
        })
        .collect())
}

/// `D_j(β)` for `j = 0..n` of `β = Σ d_iβ_i`; `d` may have negative entries.
pub fn intersection_numbers(d: &[i64]) -> Vec<i64> {
    let n = d.len() + 1;
    let at = |i: isize| -> i64 {
        if i < 1 || i as usize > n - 1 {
            0
        } else {
            d[i as usize - 1]
        }
    };
    (0..=n as isize)
        .map(|j| {
            if j == 0 {
                at(1)
            } else if j == n as isize {
                at(n as isize - 1)
            } else {
                at(j - 1) - 2 * at(j) + at(j + 1)
            }
        })
        .collect()
}

/// A curve class `β = Σ d_iβ_i` on `Y`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveClassY {
    pub d: Vec<u32>,
}

impl CurveClassY {
    pub fn new(d: Vec<u32>) -> Self {
        CurveClassY { d }
    }

    pub fn generator(n: usize, i: usize) -> Self {
        let mut d = vec![0; n - 1];
        d[i - 1] = 1;
        CurveClassY { d }
    }

    pub fn n(&self) -> usize {
        self.d.len() + 1
    }

    /// `D_0(β), …, D_n(β)`.
    pub fn big_d(&self) -> Vec<i64> {
        intersection_numbers(&self.d.iter().map(|&v| v as i64).collect::<Vec<_>>())
    }

    /// The same class seen from the orbifold chart: `y^d = x^{β̂}` with
    /// `β̂(j) = D_j(β)`.
    pub fn orbifold_exponents(&self) -> Vec<i64> {
        let big = self.big_d();
        big[1..big.len() - 1].to_vec()
    }
}

/// `y_i = x_{i−1}x_i^{−2}x_{i+1}` (absent neighbours dropped; `y₁ = x₁^{−2}`
/// when `n = 2`).
pub fn change_coordinates(x: &[Complex64]) -> Result<Vec<Complex64>> {
    if x.is_empty() {
        return Err(Error::Shape("empty point".into()));
    }
    if let Some(i) = x.iter().position(|v| *v == ZERO) {
        return Err(Error::Domain(format!("x_{} = 0 is off the torus", i + 1)));
    }
    let m = x.len();
    Ok((0..m)
        .map(|i| {
            let mut y = x[i].powi(-2);
            if i > 0 {
                y *= x[i - 1];
            }
            if i + 1 < m {
                y *= x[i + 1];
            }
            y
        })
        .collect())
}

/// A preimage of `y` under [`change_coordinates`]: `log x = C⁻¹ log y` with
/// principal logarithms. Any other preimage differs by the `μ_n` action
/// `x_k ↦ c^k x_k`.
pub fn change_coordinates_inverse(y: &[Complex64]) -> Result<Vec<Complex64>> {
    if y.is_empty() {
        return Err(Error::Shape("empty point".into()));
    }
    if let Some(i) = y.iter().position(|v| *v == ZERO) {
        return Err(Error::Domain(format!("y_{} = 0 is off the torus", i + 1)));
    }
    let m = y.len();
    let n = m + 1;
    // inverse of the tridiagonal (−2, 1) matrix: −min(i,j)(n−max(i,j))/n
    let cinv = |i: usize, j: usize| -> f64 {
        let (a, b) = (i.min(j) + 1, i.max(j) + 1);
        -((a * (n - b)) as f64) / n as f64
    };
    let logs: Vec<Complex64> = y.iter().map(|v| v.ln()).collect();
    Ok((0..m)
        .map(|i| {
            let s: Complex64 = (0..m).map(|j| logs[j] * cinv(i, j)).sum();
            s.exp()
        })
        .collect())
}

/// `Σ_i c_i log y_i + S(y)`, a multivalued solution written with an
/// explicit logarithmic part.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogSeries {
    pub log_coeffs: Vec<Complex64>,
    pub series: TruncatedSeries,
}

impl LogSeries {
    pub fn analytic(series: TruncatedSeries) -> Self {
        LogSeries {
            log_coeffs: vec![ZERO; series.nvars()],
            series,
        }
    }

    pub fn has_log(&self) -> bool {
        self.log_coeffs.iter().any(|c| *c != ZERO)
    }

    /// Evaluation with principal logarithms.
    pub fn eval(&self, y: &[Complex64]) -> Complex64 {
        let logs: Complex64 = self
            .log_coeffs
            .iter()
            .zip(y)
            .filter(|(c, _)| **c != ZERO)
            .map(|(c, v)| c * v.ln())
            .sum();
        logs + self.series.eval(y)
    }
}

/// `f_1, …, f_{n−1}` from the Gamma-ratio closed form; `f_k` collects the
/// classes with `i(β̂) = k`.
pub fn flat_coords_x(n: usize, degree: usize) -> Result<Vec<TruncatedSeries>> {
    let classes = enumerate_effective(n, degree)?;
    let basis = MonomialBasis::shared(n - 1, degree);
    let mut out: Vec<Vec<Complex64>> = vec![vec![ZERO; basis.len()]; n - 1];
    let nf = n as f64;
    for (idx, c) in classes.iter().enumerate() {
        let k = c.age_index();
        if k == 0 {
            continue;
        }
        let kf = k as f64;
        let num = reciprocal_gamma(1.0 + c.beta0()) * reciprocal_gamma(1.0 + c.betan());
        if num == 0.0 {
            continue;
        }
        let pref = 1.0 / (reciprocal_gamma(1.0 - kf / nf) * reciprocal_gamma(kf / nf));
        out[k - 1][idx] = Complex64::from(pref * num / c.factorial());
    }
    out.into_iter()
        .map(|v| TruncatedSeries::from_coeffs(basis.clone(), v))
        .collect()
}

/// `f₁` for `n = 2` from the recursion
/// `m(m−1)a_m = (m−2)²a_{m−2}/4` that the generator `β₁` imposes on a
/// power series `Σ a_m x^m` with `a₀ = 0`, `a₁ = 1`.
pub fn gkz_recursion_n2(degree: usize) -> TruncatedSeries {
    let mut f = TruncatedSeries::zero(1, degree);
    let mut a = vec![0.0f64; degree + 1];
    if degree >= 1 {
        a[1] = 1.0;
    }
    for m in 2..=degree {
        let p = (m - 2) as f64;
        a[m] = p * p * a[m - 2] / (4.0 * (m * (m - 1)) as f64);
    }
    for (m, v) in a.iter().enumerate() {
        f.coeffs_mut()[m] = Complex64::from(*v);
    }
    f
}

/// `C_{jk}`: coefficient of `γ_k` in `ω_j` for `1 ≤ j, k < n`.
fn cartan(j: usize, k: usize) -> f64 {
    match j.abs_diff(k) {
        0 => -2.0,
        1 => 1.0,
        _ => 0.0,
    }
}

/// The analytic parts `S_k` of `g_k = log y_k + S_k`, `1 ≤ k < n`.
///
/// Only classes with exactly one negative `D_j(β) = −ℓ` contribute to the
/// `z⁰` row; they give `(−1)^{ℓ−1}(ℓ−1)!/Π_{D_i>0}D_i! · ω_j`.
pub fn s_series(n: usize, degree: usize) -> Result<Vec<TruncatedSeries>> {
    check_rank(n)?;
    let basis = MonomialBasis::shared(n - 1, degree);
    let mut out: Vec<Vec<Complex64>> = vec![vec![ZERO; basis.len()]; n - 1];
    for (idx, e) in basis.all_exponents().iter().enumerate() {
        if idx == 0 {
            continue;
        }
        let big = CurveClassY::new(e.clone()).big_d();
        let neg: Vec<usize> = (0..=n).filter(|&j| big[j] < 0).collect();
        if neg.len() != 1 {
            continue;
        }
        let j = neg[0];
        let ell = (-big[j]) as usize;
        let mut c = factorial(ell - 1);
        if ell.is_multiple_of(2) {
            c = -c;
        }
        for &dj in &big {
            if dj > 0 {
                c /= factorial(dj as usize);
            }
        }
        for k in 1..n {
            let w = cartan(j, k);
            if w != 0.0 {
                out[k - 1][idx] += Complex64::from(c * w);
            }
        }
    }
    out.into_iter()
        .map(|v| TruncatedSeries::from_coeffs(basis.clone(), v))
        .collect()
}

/// `g_1, …, g_{n−1}` as `log y_k + S_k`.
pub fn mirror_map_y(n: usize, degree: usize) -> Result<Vec<LogSeries>> {
    Ok(s_series(n, degree)?
        .into_iter()
        .enumerate()
        .map(|(k, s)| {
            let mut log_coeffs = vec![ZERO; n - 1];
            log_coeffs[k] = ONE;
            LogSeries {
                log_coeffs,
                series: s,
            }
        })
        .collect())
}

/// `q_k = exp(g_k) = y_k·exp(S_k)`, single-valued.
pub fn exp_flat(n: usize, degree: usize) -> Result<Vec<TruncatedSeries>> {
    Ok(s_series(n, degree)?
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let yk = TruncatedSeries::variable(n - 1, degree, k);
            &yk * &s.exp()
        })
        .collect())
}

/// Truncated Laurent window of an I-function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IFunctionSeries {
    pub side: Space,
    pub n: usize,
    pub degree_cap: usize,
    /// rows run from `z^1` to `z^{−z_order}`
    pub z_order: usize,
    pub lambda: LambdaPair,
    /// `x₀` (or `y₀`) of the prefactor `e^{x₀/z}`
    pub x0: Complex64,
    /// `rows[r][i]` is the coefficient of `z^{1−r}` on `δ_i` (or `γ_i`)
    pub rows: Vec<Vec<TruncatedSeries>>,
}

impl IFunctionSeries {
    /// Row of `z^p`, if inside the window.
    pub fn row(&self, p: i32) -> Option<&[TruncatedSeries]> {
        if p > 1 {
            return None;
        }
        self.rows.get((1 - p) as usize).map(Vec::as_slice)
    }

    /// Component `i` as a [`ZWindow`] (prefactor excluded).
    pub fn component(&self, i: usize) -> ZWindow {
        ZWindow::new(1, self.rows.iter().map(|r| r[i].clone()).collect())
    }

    /// Rows with `e^{x₀/z}` multiplied in.
    pub fn with_prefactor(&self) -> Vec<Vec<TruncatedSeries>> {
        let e = zwindow::exp_inverse_z(self.x0, self.rows.len());
        let comps: Vec<ZWindow> = (0..self.n)
            .map(|i| self.component(i).mul_inverse_z(&e))
            .collect();
        (0..self.rows.len())
            .map(|r| comps.iter().map(|c| c.rows()[r].clone()).collect())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.rows
            .iter()
            .flatten()
            .map(TruncatedSeries::max_abs)
            .fold(0.0, f64::max)
    }
}

fn check_window(degree: usize, z_order: usize) -> Result<()> {
    if degree > 200 || z_order > 400 {
        return Err(Error::OutOfRange(format!(
            "degree {degree} / z-order {z_order} beyond supported size"
        )));
    }
    Ok(())
}

/// Multiplies a `z`-polynomial (coefficients by ascending power) by `(a + bz)`.
fn poly_mul_linear(p: &mut Vec<Complex64>, a: Complex64, b: Complex64) {
    p.push(ZERO);
    for k in (0..p.len()).rev() {
        let lower = if k > 0 { p[k - 1] } else { ZERO };
        p[k] = p[k] * a + lower * b;
    }
}

/// The orbifold I-function at numeric `λ`. Every term is a polynomial in
/// `z` times `z^{1−Σβ̂(k)}`, so the window is exact once
/// `z_order ≥ degree − 1`.
pub fn i_function_x(
    n: usize,
    degree: usize,
    z_order: usize,
    x0: Complex64,
    lambda: LambdaPair,
) -> Result<IFunctionSeries> {
    check_window(degree, z_order)?;
    let classes = enumerate_effective(n, degree)?;
    let basis = MonomialBasis::shared(n - 1, degree);
    let nrows = z_order + 2;
    let nf = n as f64;
    // (class index, age, row, value)
    let terms: Vec<Vec<(usize, usize, usize, Complex64)>> = classes
        .par_iter()
        .enumerate()
        .map(|(idx, c)| {
            let mut poly = vec![ONE];
            let a = -c.beta0_scaled();
            for t in 1..=(a / n as i64) {
                let r = -(a as f64) / nf + t as f64;
                poly_mul_linear(&mut poly, lambda.l1, Complex64::from(r));
            }
            let b = -c.betan_scaled();
            for t in 1..=(b / n as i64) {
                let s = -(b as f64) / nf + t as f64;
                poly_mul_linear(&mut poly, lambda.l2, Complex64::from(s));
            }
            let inv_fact = 1.0 / c.factorial();
            let total = c.total() as usize;
            poly.iter()
                .enumerate()
                .filter_map(|(k, &v)| {
                    // power 1 − total + k sits in row total − k
                    let row = total - k;
                    (row < nrows && v != ZERO).then_some((idx, c.age_index(), row, v * inv_fact))
                })
                .collect()
        })
        .collect();
    let mut rows: Vec<Vec<Vec<Complex64>>> = vec![vec![vec![ZERO; basis.len()]; n]; nrows];
    for (idx, age, row, v) in terms.into_iter().flatten() {
        rows[row][age][idx] += v;
    }
    let rows = rows
        .into_iter()
        .map(|r| {
            r.into_iter()
                .map(|v| TruncatedSeries::from_coeffs(basis.clone(), v))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IFunctionSeries {
        side: Space::Orbifold,
        n,
        degree_cap: degree,
        z_order,
        lambda,
        x0,
        rows,
    })
}

/// `f_1, …, f_{n−1}` read from the `z⁰` row of `I_𝒳` at `λ = 0`.
pub fn flat_coords_x_from_i(n: usize, degree: usize) -> Result<Vec<TruncatedSeries>> {
    let i = i_function_x(
        n,
        degree,
        degree.max(1),
        ZERO,
        LambdaPair::new(ZERO, ZERO),
    )?;
    Ok(i.row(0).expect("z^0 row")[1..].to_vec())
}

/// Power series in `w = 1/z`, truncated after `w^len`.
fn wseries_mul_linear(p: &mut [Complex64], a: f64, b: Complex64) {
    // p ← p·(a + b w)
    for k in (0..p.len()).rev() {
        let lower = if k > 0 { p[k - 1] } else { ZERO };
        p[k] = p[k] * a + lower * b;
    }
}

fn wseries_div_linear(p: &mut [Complex64], a: f64, b: Complex64) {
    // p ← p/(a + b w), a ≠ 0
    for k in 0..p.len() {
        let prev = if k > 0 { p[k - 1] } else { ZERO };
        p[k] = (p[k] - b * prev) / a;
    }
}

/// Per-fixed-point rows of the single-valued factor of `I_Y`:
/// `H_p = z Σ_β R_β(p) y^d`, returned as one [`ZWindow`] per fixed point.
pub fn i_function_y_fixed_points(
    fp: &FixedPointData,
    degree: usize,
    z_order: usize,
) -> Result<Vec<ZWindow>> {
    check_window(degree, z_order)?;
    let n = fp.n();
    let basis = MonomialBasis::shared(n - 1, degree);
    let nrows = z_order + 2;
    let per_class: Vec<Vec<Vec<Complex64>>> = basis
        .all_exponents()
        .par_iter()
        .map(|e| {
            let big = CurveClassY::new(e.clone()).big_d();
            (0..n)
                .map(|p| {
                    let mut r = vec![ZERO; nrows];
                    r[0] = ONE;
                    for (j, &dj) in big.iter().enumerate() {
                        let w = fp.omega_at(j, p);
                        // (ω + mz) = z(m + ωw); the z-powers cancel overall
                        if dj < 0 {
                            for m in (dj + 1)..=0 {
                                wseries_mul_linear(&mut r, m as f64, w);
                            }
                        } else {
                            for m in 1..=dj {
                                wseries_div_linear(&mut r, m as f64, w);
                            }
                        }
                    }
                    r
                })
                .collect()
        })
        .collect();
    (0..n)
        .map(|p| {
            let rows = (0..nrows)
                .map(|row| {
                    let coeffs = per_class.iter().map(|c| c[p][row]).collect();
                    TruncatedSeries::from_coeffs(basis.clone(), coeffs)?.ensure_finite("I_Y")
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ZWindow::new(1, rows))
        })
        .collect()
}

/// The resolution I-function at numeric `λ`, in the `γ` basis, without the
/// factor `e^{y₀/z} y^{γ/z}`.
pub fn i_function_y(
    n: usize,
    degree: usize,
    z_order: usize,
    y0: Complex64,
    lambda: LambdaPair,
) -> Result<IFunctionSeries> {
    let fp = FixedPointData::new(n, lambda)?;
    let h = i_function_y_fixed_points(&fp, degree, z_order)?;
    let basis = MonomialBasis::shared(n - 1, degree);
    let rows = (0..z_order + 2)
        .map(|row| {
            let mut comps = vec![vec![ZERO; basis.len()]; n];
            for idx in 0..basis.len() {
                let restr: Vec<Complex64> = h.iter().map(|w| w.rows()[row].coeffs()[idx]).collect();
                for (k, v) in fp.basis_coeffs(&restr).into_iter().enumerate() {
                    comps[k][idx] = v;
                }
            }
            comps
                .into_iter()
                .map(|v| TruncatedSeries::from_coeffs(basis.clone(), v))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IFunctionSeries {
        side: Space::Resolution,
        n,
        degree_cap: degree,
        z_order,
        lambda,
        x0: y0,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> Complex64 {
        Complex64::from(v)
    }

    #[test]
    fn enumeration_small_cases() {
        let e = enumerate_effective(3, 1).unwrap();
        let got: Vec<_> = e.iter().map(|c| c.beta.clone()).collect();
        assert_eq!(got, vec![vec![0, 0], vec![1, 0], vec![0, 1]]);
        assert_eq!(enumerate_effective(3, 2).unwrap().len(), 6);
        assert_eq!(enumerate_effective(2, 3).unwrap().len(), 4);
    }

    #[test]
    fn derived_class_data() {
        let c = EffectiveClass::new(2, vec![1]).unwrap();
        assert_eq!(c.beta0(), -0.5);
        assert_eq!(c.age_index(), 1);
        let c = EffectiveClass::new(4, vec![1, 0, 1]).unwrap();
        assert_eq!(c.beta0_scaled(), -4);
        assert_eq!(c.betan_scaled(), -4);
        assert_eq!(c.age_index(), 0);
    }

    #[test]
    fn intersection_numbers_of_generators() {
        assert_eq!(CurveClassY::generator(2, 1).big_d(), vec![1, -2, 1]);
        assert_eq!(CurveClassY::generator(4, 2).big_d(), vec![0, 1, -2, 1, 0]);
        assert_eq!(CurveClassY::new(vec![1, 1, 1]).big_d(), vec![1, -1, 0, -1, 1]);
    }

    #[test]
    fn n2_mirror_map_coefficients() {
        let f = &flat_coords_x(2, 7).unwrap()[0];
        assert_eq!(f.coeff(&[1]), c(1.0));
        assert!((f.coeff(&[3]) - c(1.0 / 24.0)).norm() < 1e-15);
        assert!((f.coeff(&[5]) - c(3.0 / 640.0)).norm() < 1e-15);
        assert_eq!(f.coeff(&[2]), ZERO);
        let g = gkz_recursion_n2(7);
        for (a, b) in f.coeffs().iter().zip(g.coeffs()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn flat_coords_two_routes_agree() {
        for n in 2..6 {
            let a = flat_coords_x(n, 6).unwrap();
            let b = flat_coords_x_from_i(n, 6).unwrap();
            for (fa, fb) in a.iter().zip(&b) {
                let d = fa.try_sub(fb).unwrap().max_abs();
                assert!(d < 1e-13 * fa.max_abs().max(1.0), "n={n}: {d}");
            }
            for (k, f) in a.iter().enumerate() {
                let mut e = vec![0; n - 1];
                e[k] = 1;
                assert!((f.coeff(&e) - ONE).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn i_function_x_small_terms() {
        let lam = LambdaPair::real(0.3, -0.8);
        let i = i_function_x(2, 3, 5, ZERO, lam).unwrap();
        // β̂ = 0 contributes z·δ₀
        assert_eq!(i.row(1).unwrap()[0].constant_term(), ONE);
        // β̂ = 1 contributes (x₁/z)·δ₁ only
        assert_eq!(i.row(0).unwrap()[1].coeff(&[1]), ONE);
        assert_eq!(i.row(-1).unwrap()[1].coeff(&[1]), ZERO);
        // β̂ = 2: β̂(0) = β̂(2) = −1, so r = s = 0 and the term is λ₁λ₂x₁²/(2z)
        assert_eq!(i.row(1).unwrap()[0].coeff(&[2]), ZERO);
        assert_eq!(i.row(0).unwrap()[0].coeff(&[2]), ZERO);
        let rm = i.row(-1).unwrap()[0].coeff(&[2]);
        assert!((rm - c(0.3 * -0.8 / 2.0)).norm() < 1e-15);
        // β̂ = 3: (λ₁ − z/2)(λ₂ − z/2)x₁³/(6z²) on δ₁
        assert!((i.row(0).unwrap()[1].coeff(&[3]) - c(1.0 / 24.0)).norm() < 1e-15);
        let r2 = i.row(-2).unwrap()[1].coeff(&[3]);
        assert!((r2 - c(0.3 * -0.8 / 6.0)).norm() < 1e-15);
    }

    #[test]
    fn degree_zero_skeleton() {
        let lam = LambdaPair::real(1.0, 2.0);
        let i = i_function_x(3, 0, 2, c(0.5), lam).unwrap();
        let full = i.with_prefactor();
        assert_eq!(full[0][0].constant_term(), ONE);
        assert_eq!(full[1][0].constant_term(), c(0.5));
        assert_eq!(full[2][0].constant_term(), c(0.125));
        assert_eq!(full[1][1].constant_term(), ZERO);
    }

    #[test]
    fn s_series_n2_closed_form() {
        let s = &s_series(2, 6).unwrap()[0];
        // (2d)!/(d·d!²)
        let want = [0.0, 2.0, 3.0, 20.0 / 3.0, 35.0 / 2.0, 252.0 / 5.0, 154.0];
        for (d, w) in want.iter().enumerate() {
            assert!((s.coeff(&[d as u32]) - c(*w)).norm() < 1e-12, "d={d}");
        }
    }

    #[test]
    fn s_series_matches_i_function_row() {
        let lam = LambdaPair::real(0.45, -1.2);
        for n in 2..6 {
            let s = s_series(n, 5).unwrap();
            let i = i_function_y(n, 5, 3, ZERO, lam).unwrap();
            let row = i.row(0).unwrap();
            assert!(row[0].max_abs() < 1e-12, "g0 has no series part");
            for k in 1..n {
                let d = row[k].try_sub(&s[k - 1]).unwrap().max_abs();
                assert!(d < 1e-11 * s[k - 1].max_abs(), "n={n} k={k} d={d}");
            }
            assert!((i.row(1).unwrap()[0].try_sub(&TruncatedSeries::one(n - 1, 5)).unwrap()).max_abs() < 1e-12);
        }
    }

    #[test]
    fn i_function_y_n2_degree_one_term() {
        // D = (1,−2,1): R = ω₁(ω₁ − z)/((ω₀ + z)(ω₂ + z)) at each fixed point
        let lam = LambdaPair::real(0.7, 0.2);
        let fp = FixedPointData::new(2, lam).unwrap();
        let h = i_function_y_fixed_points(&fp, 1, 4).unwrap();
        for (p, win) in h.iter().enumerate() {
            let (w0, w1, w2) = (fp.omega_at(0, p), fp.omega_at(1, p), fp.omega_at(2, p));
            let z = Complex64::from(5.0);
            let exact = w1 * (w1 - z) / ((w0 + z) * (w2 + z));
            let approx: Complex64 = (0..win.rows().len())
                .map(|r| win.rows()[r].coeff(&[1]) * z.powi(-(r as i32)))
                .sum();
            assert!((exact - approx).norm() < 1e-3, "p={p}: {exact} vs {approx}");
        }
    }

    #[test]
    fn exp_flat_leading_terms() {
        let q = exp_flat(2, 3).unwrap();
        // y·exp(2y + 3y² + …) = y + 2y² + 5y³ + …
        assert_eq!(q[0].coeff(&[1]), ONE);
        assert!((q[0].coeff(&[2]) - c(2.0)).norm() < 1e-14);
        assert!((q[0].coeff(&[3]) - c(5.0)).norm() < 1e-14);
    }

    #[test]
    fn coordinate_change_examples() {
        let y = change_coordinates(&[c(2.0)]).unwrap();
        assert_eq!(y, vec![c(0.25)]);
        let y = change_coordinates(&[ONE, ONE]).unwrap();
        assert_eq!(y, vec![ONE, ONE]);
        assert!(change_coordinates(&[ONE, ZERO]).is_err());
        let x = vec![Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.5), c(1.7)];
        let y = change_coordinates(&x).unwrap();
        let back = change_coordinates(&change_coordinates_inverse(&y).unwrap()).unwrap();
        for (a, b) in y.iter().zip(&back) {
            assert!((a - b).norm() < 1e-12 * a.norm());
        }
    }
}
