//! GKZ and Picard–Fuchs operators in both charts, and their residuals.
//!
//! A class is described by its exponents `E_0, …, E_n` (`β̂(j)` on the
//! orbifold side, `D_j(β)` on the resolution side) and by the monomial that
//! multiplies the right-hand side. The operator is
//!
//! ```text
//! Π_{E_j>0} Π_{m<E_j} (ℷ_j − m)  −  monomial · Π_{E_j<0} Π_{m<−E_j} (ℷ_j − m)
//! ```
//!
//! where each `ℷ_j` is a weighted Euler operator. The Picard–Fuchs version
//! replaces `ℷ_j − m` by `λ_j + z(ℷ_j − m)` with `λ_0 = λ₁`, `λ_n = λ₂`
//! and `λ_j = 0` otherwise. In the `x` chart the monomial may have negative
//! exponents; both sides are then multiplied by the inverse of its negative
//! part so the residual stays a power series.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::zwindow::{exp_inverse_z, ZWindow};
use super::{intersection_numbers, IFunctionSeries, LogSeries};
use crate::cohomology::{FixedPointData, LambdaPair, Space};
use crate::error::{Error, Result};
use crate::series::{MonomialBasis, TruncatedSeries};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chart {
    /// near the orbifold point, coordinates `x₁…x_{n−1}`
    X,
    /// near the large-radius point of `Y`, coordinates `y₁…y_{n−1}`
    Y,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GkzOperator {
    pub n: usize,
    pub chart: Chart,
    /// `E_0, …, E_n`
    pub exponents: Vec<i64>,
    /// exponents of the right-hand monomial in the chart's variables
    pub monomial: Vec<i64>,
}

impl GkzOperator {
    /// Operator of the curve class `β = Σ d_iβ_i`, written in `chart`.
    pub fn curve_class(n: usize, d: &[u32], chart: Chart) -> Result<Self> {
        if n < 2 || d.len() != n - 1 {
            return Err(Error::Shape(format!("curve class of length {} at rank {n}", d.len())));
        }
        let exponents = intersection_numbers(&d.iter().map(|&v| v as i64).collect::<Vec<_>>());
        let monomial = match chart {
            Chart::Y => d.iter().map(|&v| v as i64).collect(),
            Chart::X => exponents[1..n].to_vec(),
        };
        Ok(GkzOperator {
            n,
            chart,
            exponents,
            monomial,
        })
    }

    /// Operator of an orbifold class `β̂(1..n−1)` with `i(β̂) = 0`, in the
    /// `x` chart.
    pub fn orbifold_class(n: usize, beta_hat: &[i64]) -> Result<Self> {
        if n < 2 || beta_hat.len() != n - 1 {
            return Err(Error::Shape(format!(
                "orbifold class of length {} at rank {n}",
                beta_hat.len()
            )));
        }
        let ni = n as i64;
        let s0: i64 = beta_hat.iter().enumerate().map(|(i, b)| (ni - 1 - i as i64) * b).sum();
        let sn: i64 = beta_hat.iter().enumerate().map(|(i, b)| (i as i64 + 1) * b).sum();
        if sn.rem_euclid(ni) != 0 {
            return Err(Error::Domain(format!(
                "class {beta_hat:?} has nonzero age index {}",
                sn.rem_euclid(ni)
            )));
        }
        let mut exponents = vec![-s0 / ni];
        exponents.extend_from_slice(beta_hat);
        exponents.push(-sn / ni);
        Ok(GkzOperator {
            n,
            chart: Chart::X,
            exponents,
            monomial: beta_hat.to_vec(),
        })
    }

    /// The generators `β₁, …, β_{n−1}`.
    pub fn generators(n: usize, chart: Chart) -> Result<Vec<Self>> {
        (1..n)
            .map(|i| {
                let mut d = vec![0; n - 1];
                d[i - 1] = 1;
                GkzOperator::curve_class(n, &d, chart)
            })
            .collect()
    }

    pub fn lhs_factors(&self) -> Vec<(usize, i64)> {
        self.factors(1)
    }

    pub fn rhs_factors(&self) -> Vec<(usize, i64)> {
        self.factors(-1)
    }

    fn factors(&self, sign: i64) -> Vec<(usize, i64)> {
        let mut out = Vec::new();
        for (j, &e) in self.exponents.iter().enumerate() {
            let e = e * sign;
            for m in 0..e.max(0) {
                out.push((j, m));
            }
        }
        out
    }

    /// Number of factors on each side.
    pub fn order(&self) -> usize {
        self.lhs_factors().len().max(self.rhs_factors().len())
    }

    /// Weights `w` with `ℷ_j = Σ w_i v_i ∂/∂v_i` in the chart's variables.
    pub fn weights(&self, j: usize) -> Vec<f64> {
        let n = self.n;
        let mut w = vec![0.0; n - 1];
        match self.chart {
            Chart::Y => {
                if j == 0 {
                    w[0] = 1.0;
                } else if j == n {
                    w[n - 2] = 1.0;
                } else {
                    w[j - 1] = -2.0;
                    if j >= 2 {
                        w[j - 2] = 1.0;
                    }
                    if j <= n - 2 {
                        w[j] = 1.0;
                    }
                }
            }
            Chart::X => {
                if j == 0 {
                    for (k, v) in w.iter_mut().enumerate() {
                        *v = -((n - k - 1) as f64) / n as f64;
                    }
                } else if j == n {
                    for (k, v) in w.iter_mut().enumerate() {
                        *v = -((k + 1) as f64) / n as f64;
                    }
                } else {
                    w[j - 1] = 1.0;
                }
            }
        }
        w
    }

    fn monomial_parts(&self) -> (Vec<u32>, Vec<u32>) {
        let neg = self.monomial.iter().map(|&e| (-e).max(0) as u32).collect();
        let pos = self.monomial.iter().map(|&e| e.max(0) as u32).collect();
        (neg, pos)
    }

    fn check_series(&self, f: &TruncatedSeries) -> Result<()> {
        if f.nvars() != self.n - 1 {
            return Err(Error::Shape(format!(
                "series in {} variables for rank {}",
                f.nvars(),
                self.n
            )));
        }
        Ok(())
    }
}

/// `λ_j` of the Picard–Fuchs operators.
pub fn lambda_shift(n: usize, j: usize, lambda: &LambdaPair) -> Complex64 {
    if j == 0 {
        lambda.l1
    } else if j == n {
        lambda.l2
    } else {
        ZERO
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GkzResidual {
    pub operator: GkzOperator,
    pub residual: TruncatedSeries,
    pub max_abs: f64,
    /// largest coefficient of the input solution
    pub input_scale: f64,
}

impl GkzResidual {
    pub fn relative(&self) -> f64 {
        if self.input_scale == 0.0 {
            self.max_abs
        } else {
            self.max_abs / self.input_scale
        }
    }
}

fn apply_gkz(op: &GkzOperator, f: &TruncatedSeries, factors: &[(usize, i64)]) -> TruncatedSeries {
    let mut g = f.clone();
    for &(j, m) in factors {
        let mut next = g.weighted_euler(&op.weights(j));
        next.add_scaled(&g, Complex64::from(-(m as f64)));
        g = next;
    }
    g
}

/// Residual of a power series in the `x` chart.
pub fn gkz_residual_x(op: &GkzOperator, f: &TruncatedSeries) -> Result<GkzResidual> {
    if op.chart != Chart::X {
        return Err(Error::Domain("operator is not written in the x chart".into()));
    }
    op.check_series(f)?;
    let (neg, pos) = op.monomial_parts();
    let lhs = apply_gkz(op, f, &op.lhs_factors()).shift(&neg);
    let rhs = apply_gkz(op, f, &op.rhs_factors()).shift(&pos);
    let residual = lhs.try_sub(&rhs)?;
    Ok(GkzResidual {
        operator: op.clone(),
        max_abs: residual.max_abs(),
        input_scale: f.max_abs(),
        residual,
    })
}

fn apply_gkz_log(op: &GkzOperator, g: &LogSeries, factors: &[(usize, i64)]) -> LogSeries {
    let mut cur = g.clone();
    for &(j, m) in factors {
        let w = op.weights(j);
        let m = Complex64::from(m as f64);
        let mut s = cur.series.weighted_euler(&w);
        s.add_scaled(&cur.series, -m);
        let c: Complex64 = cur.log_coeffs.iter().zip(&w).map(|(c, w)| c * w).sum();
        s.coeffs_mut()[0] += c;
        cur = LogSeries {
            log_coeffs: cur.log_coeffs.iter().map(|c| -m * c).collect(),
            series: s,
        };
    }
    cur
}

/// Residual of `Σ c_i log y_i + S(y)` in the `y` chart. Every factor
/// `ℷ_j − 0` turns the logarithms into constants; if logarithms survive on
/// either side the residual is not a power series and a domain error is
/// returned.
pub fn gkz_residual_y(op: &GkzOperator, g: &LogSeries) -> Result<GkzResidual> {
    if op.chart != Chart::Y {
        return Err(Error::Domain("operator is not written in the y chart".into()));
    }
    op.check_series(&g.series)?;
    if g.log_coeffs.len() != op.n - 1 {
        return Err(Error::Shape("log coefficients do not match rank".into()));
    }
    let lhs = apply_gkz_log(op, g, &op.lhs_factors());
    let rhs = apply_gkz_log(op, g, &op.rhs_factors());
    if lhs.has_log() || rhs.has_log() {
        return Err(Error::Domain("logarithmic terms survive the operator".into()));
    }
    let (neg, pos) = op.monomial_parts();
    let residual = lhs.series.shift(&neg).try_sub(&rhs.series.shift(&pos))?;
    let input_scale = g
        .log_coeffs
        .iter()
        .map(|c| c.norm())
        .fold(g.series.max_abs(), f64::max);
    Ok(GkzResidual {
        operator: op.clone(),
        max_abs: residual.max_abs(),
        input_scale,
        residual,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PfResidual {
    pub side: Space,
    pub operator: GkzOperator,
    /// `(lowest, highest)` power of `z` where the residual is exact
    pub window: (i32, i32),
    pub max_abs: f64,
    /// largest coefficient of either side inside the window
    pub scale: f64,
}

impl PfResidual {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.max_abs
        } else {
            self.max_abs / self.scale
        }
    }
}

fn apply_pf(
    op: &GkzOperator,
    win: &ZWindow,
    factors: &[(usize, i64)],
    shift: impl Fn(usize) -> Complex64,
) -> Result<ZWindow> {
    let mut cur = win.clone();
    for &(j, m) in factors {
        cur = cur.apply_factor(shift(j), &op.weights(j), m as f64)?;
    }
    Ok(cur)
}

fn pf_on_windows(
    op: &GkzOperator,
    side: Space,
    wins: &[ZWindow],
    shift: impl Fn(usize, usize) -> Complex64,
) -> Result<PfResidual> {
    let (neg, pos) = op.monomial_parts();
    let mut max_abs: f64 = 0.0;
    let mut scale: f64 = 0.0;
    let mut window = (i32::MIN, i32::MAX);
    for (c, w) in wins.iter().enumerate() {
        let lhs = apply_pf(op, w, &op.lhs_factors(), |j| shift(c, j))?.shift(&neg);
        let rhs = apply_pf(op, w, &op.rhs_factors(), |j| shift(c, j))?.shift(&pos);
        let res = lhs.sub_common(&rhs)?;
        window = (window.0.max(res.low()), window.1.min(res.top()));
        max_abs = max_abs.max(res.max_abs());
        scale = scale.max(lhs.max_abs()).max(rhs.max_abs());
    }
    Ok(PfResidual {
        side,
        operator: op.clone(),
        window,
        max_abs,
        scale,
    })
}

/// Picard–Fuchs residual of `I_𝒳` (prefactor included) for an `x`-chart
/// operator.
pub fn pf_residual_x(i: &IFunctionSeries, op: &GkzOperator) -> Result<PfResidual> {
    if i.side != Space::Orbifold || op.chart != Chart::X || op.n != i.n {
        return Err(Error::Domain("pf_residual_x needs an orbifold I-function and x-chart operator".into()));
    }
    let e = exp_inverse_z(i.x0, i.rows.len());
    let wins: Vec<ZWindow> = (0..i.n).map(|c| i.component(c).mul_inverse_z(&e)).collect();
    let lambda = i.lambda;
    let n = i.n;
    pf_on_windows(op, Space::Orbifold, &wins, |_, j| lambda_shift(n, j, &lambda))
}

/// Picard–Fuchs residual of `I_Y` for a `y`-chart operator. The factor
/// `y^{γ/z}` is handled by conjugation: at the fixed point `p` the operator
/// `λ_j + zℷ_j` becomes `ω_j(p) + zℷ_j` acting on the single-valued rows.
pub fn pf_residual_y(i: &IFunctionSeries, op: &GkzOperator) -> Result<PfResidual> {
    if i.side != Space::Resolution || op.chart != Chart::Y || op.n != i.n {
        return Err(Error::Domain("pf_residual_y needs a resolution I-function and y-chart operator".into()));
    }
    let fp = FixedPointData::new(i.n, i.lambda)?;
    let e = exp_inverse_z(i.x0, i.rows.len());
    let basis = i.rows[0][0].basis().clone();
    let wins = (0..i.n)
        .map(|p| {
            let rows = i
                .rows
                .iter()
                .map(|row| {
                    let coeffs = (0..basis.len())
                        .map(|idx| (0..i.n).map(|k| row[k].coeffs()[idx] * fp.gamma_at(k, p)).sum())
                        .collect();
                    TruncatedSeries::from_coeffs(basis.clone(), coeffs)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ZWindow::new(1, rows).mul_inverse_z(&e))
        })
        .collect::<Result<Vec<_>>>()?;
    pf_on_windows(op, Space::Resolution, &wins, |p, j| fp.omega_at(j, p))
}

/// Residual of `z ∂/∂x₀ I − I`, with `x₀` promoted to a formal variable
/// (the first variable of the enlarged ring). Returns the largest residual
/// coefficient and the largest coefficient compared.
pub fn pf_residual_x0(i: &IFunctionSeries) -> Result<(f64, f64)> {
    let m = i.n; // x0 plus the n−1 chart variables
    let cap = i.degree_cap + 1;
    let big = MonomialBasis::shared(m, cap);
    let small = i.rows[0][0].basis().clone();
    let nrows = i.rows.len();
    let fact = |k: usize| -> f64 { (2..=k).map(|v| v as f64).product() };
    // full[r][c]: coefficient of z^{1−r}, with e^{x0/z} expanded in x0
    let full: Vec<Vec<TruncatedSeries>> = (0..nrows)
        .map(|r| {
            (0..i.n)
                .map(|c| {
                    let coeffs = big
                        .all_exponents()
                        .iter()
                        .map(|e| {
                            let k = e[0] as usize;
                            if k > r {
                                return ZERO;
                            }
                            match small.index_of(&e[1..]) {
                                Some(idx) => i.rows[r - k][c].coeffs()[idx] / fact(k),
                                None => ZERO,
                            }
                        })
                        .collect();
                    TruncatedSeries::from_coeffs(big.clone(), coeffs)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut max_abs: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for r in 0..nrows.saturating_sub(1) {
        for c in 0..i.n {
            // z·∂/∂x0 maps the z^{1−(r+1)} row to z^{1−r}
            let lhs = full[r + 1][c].derivative(0);
            let rhs = full[r][c].with_cap(cap - 1);
            max_abs = max_abs.max(lhs.try_sub(&rhs)?.max_abs());
            scale = scale.max(rhs.max_abs());
        }
    }
    Ok((max_abs, scale))
}
