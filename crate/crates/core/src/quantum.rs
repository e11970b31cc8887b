//! Quantum products read off the I-functions in flat coordinates.
//!
//! On the `𝒳` side `J(u) = I_𝒳(x(u))` with `x(u)` the inverse of the mirror
//! map, variables `u_1, …, u_{n−1}`. On the `Y` side the divisor factor
//! `e^{t₀/z} e^{Σ t_iγ_i/z}` is split off and the remaining factor
//! `K = e^{−Σ γ_i S_i/z} H(y(q))` is a power series in `q_i = e^{t_i}`. In
//! both cases the quantum differential equation is written as
//! `V_{ij}(z) = Σ_k c_{ij}^k M_k(z)`, where `M_k = z∂_k J` (and `M_0 = J`),
//! `V_{ij} = z∂_i z∂_j J`. Its `z¹` row determines the structure constants,
//! the lower rows are checked as residuals.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cohomology::{gram_x, l_matrix, FixedPointData, LambdaPair, Space};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::mirror::{exp_flat, i_function_x, i_function_y, s_series, IFunctionSeries};
use crate::series::{reverse, TruncatedSeries};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// An I-function rewritten in flat coordinates, without the `e^{u₀/z}`
/// (resp. `e^{t₀/z} e^{Σ t_iγ_i/z}`) factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatIFunction {
    pub side: Space,
    pub n: usize,
    pub degree_cap: usize,
    pub z_order: usize,
    pub lambda: LambdaPair,
    /// `rows[r][k]`: coefficient of `z^{1−r}` on `δ_k` (resp. `γ_k`), a
    /// series in `u_1..u_{n−1}` (resp. `q_1..q_{n−1}`)
    pub rows: Vec<Vec<TruncatedSeries>>,
    /// largest deviation of the `z¹`, `z⁰` rows from `z·1 + Σ u_kδ_k`
    /// (resp. `z·1`)
    pub flatness_defect: f64,
}

fn linear_combination(
    terms: impl IntoIterator<Item = (Complex64, TruncatedSeries)>,
    nvars: usize,
    cap: usize,
) -> TruncatedSeries {
    let mut acc = TruncatedSeries::zero(nvars, cap);
    for (c, s) in terms {
        if c != ZERO {
            acc.add_scaled(&s, c);
        }
    }
    acc
}

/// Rewrites `I` in flat coordinates: `x = x(u)` on `𝒳`, and on `Y`
/// `y = y(q)` together with the factor `e^{−Σγ_iS_i/z}`.
pub fn to_flat_coordinates(i: &IFunctionSeries) -> Result<FlatIFunction> {
    match i.side {
        Space::Orbifold => flat_x(i),
        Space::Resolution => flat_y(i),
    }
}

fn flat_x(i: &IFunctionSeries) -> Result<FlatIFunction> {
    let n = i.n;
    let cap = i.degree_cap;
    let m = n - 1;
    let f: Vec<TruncatedSeries> = i.row(0).ok_or_else(|| Error::Window("no z^0 row".into()))?[1..].to_vec();
    let x_of_u = reverse(&f)?;
    let rows = i
        .rows
        .iter()
        .map(|row| row.iter().map(|s| s.compose(&x_of_u)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let mut defect: f64 = 0.0;
    for k in 0..n {
        let top = if k == 0 { TruncatedSeries::one(m, cap) } else { TruncatedSeries::zero(m, cap) };
        defect = defect.max(rows[0][k].try_sub(&top)?.max_abs());
        let mid = if k == 0 {
            TruncatedSeries::zero(m, cap)
        } else {
            TruncatedSeries::variable(m, cap, k - 1)
        };
        defect = defect.max(rows[1][k].try_sub(&mid)?.max_abs());
    }
    Ok(FlatIFunction {
        side: Space::Orbifold,
        n,
        degree_cap: cap,
        z_order: i.z_order,
        lambda: i.lambda,
        rows,
        flatness_defect: defect,
    })
}

/// Matrix taking fixed-point values to γ-coefficients.
fn to_basis_matrix(fp: &FixedPointData) -> CMatrix {
    let n = fp.n();
    let mut m = CMatrix::zeros(n, n);
    for p in 0..n {
        let mut e = vec![ZERO; n];
        e[p] = ONE;
        for (k, v) in fp.basis_coeffs(&e).into_iter().enumerate() {
            m[(k, p)] = v;
        }
    }
    m
}

fn flat_y(i: &IFunctionSeries) -> Result<FlatIFunction> {
    let n = i.n;
    let cap = i.degree_cap;
    let m = n - 1;
    let fp = FixedPointData::new(n, i.lambda)?;
    let y_of_q = reverse(&exp_flat(n, cap)?)?;
    let s: Vec<TruncatedSeries> = s_series(n, cap)?
        .iter()
        .map(|f| f.compose(&y_of_q))
        .collect::<Result<Vec<_>>>()?;
    let nrows = i.rows.len();
    let to_basis = to_basis_matrix(&fp);
    // per fixed point: rows of H(y(q)), then the factor e^{−a_p/z}
    let per_point: Vec<Vec<TruncatedSeries>> = (0..n)
        .into_par_iter()
        .map(|p| -> Result<Vec<TruncatedSeries>> {
            let h: Vec<TruncatedSeries> = i
                .rows
                .iter()
                .map(|row| {
                    linear_combination((0..n).map(|k| (fp.gamma_at(k, p), row[k].clone())), m, cap)
                        .compose(&y_of_q)
                })
                .collect::<Result<Vec<_>>>()?;
            let a = linear_combination((1..n).map(|k| (-fp.gamma_at(k, p), s[k - 1].clone())), m, cap);
            // powers (−a)^j/j!
            let mut pw = vec![TruncatedSeries::one(m, cap)];
            for j in 1..nrows {
                let next = (&pw[j - 1] * &a).scale(Complex64::from(1.0 / j as f64));
                pw.push(next);
            }
            Ok((0..nrows)
                .map(|r| {
                    let mut acc = TruncatedSeries::zero(m, cap);
                    for j in 0..=r {
                        acc = &acc + &(&pw[j] * &h[r - j]);
                    }
                    acc
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<Vec<TruncatedSeries>> = (0..nrows)
        .map(|r| {
            (0..n)
                .map(|k| linear_combination((0..n).map(|p| (to_basis[(k, p)], per_point[p][r].clone())), m, cap))
                .collect()
        })
        .collect();
    let mut defect: f64 = 0.0;
    for k in 0..n {
        let top = if k == 0 { TruncatedSeries::one(m, cap) } else { TruncatedSeries::zero(m, cap) };
        defect = defect.max(rows[0][k].try_sub(&top)?.max_abs());
        defect = defect.max(rows[1][k].max_abs());
    }
    Ok(FlatIFunction {
        side: Space::Resolution,
        n,
        degree_cap: cap,
        z_order: i.z_order,
        lambda: i.lambda,
        rows,
        flatness_defect: defect,
    })
}

/// Vector-valued Laurent window: `rows[r][c]` is the coefficient of
/// `z^{top−r}` in component `c`.
#[derive(Clone, Debug)]
struct VecWindow {
    top: i32,
    rows: Vec<Vec<TruncatedSeries>>,
}

impl VecWindow {
    fn low(&self) -> i32 {
        self.top - self.rows.len() as i32 + 1
    }

    fn get(&self, p: i32) -> Option<&[TruncatedSeries]> {
        if p > self.top || p < self.low() {
            return None;
        }
        Some(&self.rows[(self.top - p) as usize])
    }

    fn with_cap(&self, cap: usize) -> Self {
        VecWindow {
            top: self.top,
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|s| s.with_cap(cap)).collect())
                .collect(),
        }
    }
}

/// The differential operators of the quantum differential equation in a
/// representation where they act componentwise.
enum Qde {
    /// `z∂/∂u_k` in the δ-basis
    Orbifold,
    /// `γ_k + z q_k∂/∂q_k` at each fixed point
    Resolution { gamma: Vec<Vec<Complex64>> },
}

impl Qde {
    fn apply(&self, w: &VecWindow, k: usize) -> VecWindow {
        if k == 0 {
            return w.clone();
        }
        match self {
            Qde::Orbifold => VecWindow {
                top: w.top + 1,
                rows: w
                    .rows
                    .iter()
                    .map(|r| r.iter().map(|s| s.derivative(k - 1)).collect())
                    .collect(),
            },
            Qde::Resolution { gamma } => {
                let nc = w.rows[0].len();
                let mut rows = Vec::with_capacity(w.rows.len() + 1);
                for r in 0..=w.rows.len() {
                    let row = (0..nc)
                        .map(|p| {
                            let mut acc = match w.rows.get(r) {
                                Some(cur) => cur[p].euler(k - 1),
                                None => TruncatedSeries::zero(w.rows[0][p].nvars(), w.rows[0][p].degree_cap()),
                            };
                            if r > 0 {
                                acc.add_scaled(&w.rows[r - 1][p], gamma[k][p]);
                            }
                            acc
                        })
                        .collect();
                    rows.push(row);
                }
                // the last row would need the row below the window
                rows.pop();
                VecWindow { top: w.top + 1, rows }
            }
        }
    }
}

/// Big quantum product structure constants `c_{ij}^k`, each a series in the
/// flat variables (`u` on `𝒳`, `q` on `Y`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureConstants {
    pub side: Space,
    pub n: usize,
    pub lambda: LambdaPair,
    /// total degree through which the entries are exact
    pub degree_cap: usize,
    /// `c[i][j][k]`
    pub c: Vec<Vec<Vec<TruncatedSeries>>>,
}

impl StructureConstants {
    pub fn entry(&self, i: usize, j: usize, k: usize) -> &TruncatedSeries {
        &self.c[i][j][k]
    }

    /// Matrices of `e_i ⋆` at a point, entry `(k, j)` = `c_{ij}^k`.
    pub fn matrices_at(&self, point: &[Complex64]) -> Vec<CMatrix> {
        (0..self.n)
            .map(|i| CMatrix::from_fn(self.n, self.n, |k, j| self.c[i][j][k].eval(point)))
            .collect()
    }

    pub fn matrices_at_origin(&self) -> Vec<CMatrix> {
        (0..self.n)
            .map(|i| CMatrix::from_fn(self.n, self.n, |k, j| self.c[i][j][k].constant_term()))
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.c
            .iter()
            .flatten()
            .flatten()
            .map(TruncatedSeries::max_abs)
            .fold(0.0, f64::max)
    }

    /// Largest coefficient difference from `other`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        if self.n != other.n || self.side != other.side {
            return Err(Error::Shape("structure constants of different shape".into()));
        }
        let cap = self.degree_cap.min(other.degree_cap);
        let mut d: f64 = 0.0;
        for (a, b) in self.c.iter().flatten().flatten().zip(other.c.iter().flatten().flatten()) {
            d = d.max(a.with_cap(cap).try_sub(&b.with_cap(cap))?.max_abs());
        }
        Ok(d)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    pub constants: StructureConstants,
    pub flatness_defect: f64,
    /// largest QDE residual over the rows below `z¹`, relative to the
    /// largest coefficient of `z∂_i z∂_j J`
    pub qde_residual: f64,
    /// number of `z`-rows that entered the residual
    pub residual_rows: usize,
}

/// Reads `c_{ij}^k` off the `z¹` row of the quantum differential equation and
/// checks the lower rows.
pub fn extract_structure_constants(flat: &FlatIFunction) -> Result<Extraction> {
    let n = flat.n;
    if flat.rows.len() < 3 {
        return Err(Error::Window(
            "structure constants need the z^{-1} row of the I-function".into(),
        ));
    }
    let (qde, cap, to_comp) = match flat.side {
        Space::Orbifold => {
            if flat.degree_cap < 2 {
                return Err(Error::OutOfRange("degree cap below 2 leaves no constants".into()));
            }
            (Qde::Orbifold, flat.degree_cap - 2, CMatrix::identity(n, n))
        }
        Space::Resolution => {
            let fp = FixedPointData::new(n, flat.lambda)?;
            let gamma: Vec<Vec<Complex64>> = (0..n)
                .map(|k| (0..n).map(|p| fp.gamma_at(k, p)).collect())
                .collect();
            let restrict = CMatrix::from_fn(n, n, |p, k| gamma[k][p]);
            (Qde::Resolution { gamma }, flat.degree_cap, restrict)
        }
    };
    let m = n - 1;
    let convert = |row: &[TruncatedSeries], mat: &CMatrix| -> Vec<TruncatedSeries> {
        (0..n)
            .map(|a| linear_combination((0..n).map(|b| (mat[(a, b)], row[b].clone())), m, flat.degree_cap))
            .collect()
    };
    let j = VecWindow {
        top: 1,
        rows: flat.rows.iter().map(|r| convert(r, &to_comp)).collect(),
    };
    let cols: Vec<VecWindow> = (0..n).map(|k| qde.apply(&j, k).with_cap(cap)).collect();
    // leading coefficient matrix: z¹ row of the columns, constant terms
    let lead = CMatrix::from_fn(n, n, |a, k| cols[k].get(1).map_or(ZERO, |r| r[a].constant_term()));
    let lead_inv = linalg::inverse(&lead).map_err(|_| {
        Error::SingularSolve("leading QDE matrix is singular; resample lambda".into())
    })?;
    let mut c = vec![vec![vec![TruncatedSeries::zero(m, cap); n]; n]; n];
    let mut residual: f64 = 0.0;
    let mut rows_used = usize::MAX;
    for a in 0..n {
        for b in a..n {
            let v = qde.apply(&qde.apply(&j, b), a).with_cap(cap);
            let lead_row = v.get(1).ok_or_else(|| Error::Window("missing z^1 row".into()))?;
            let coeffs: Vec<TruncatedSeries> = (0..n)
                .map(|k| linear_combination((0..n).map(|p| (lead_inv[(k, p)], lead_row[p].clone())), m, cap))
                .collect();
            let scale = v.rows.iter().flatten().map(TruncatedSeries::max_abs).fold(0.0, f64::max).max(1e-300);
            let low = v.low().max(cols.iter().map(VecWindow::low).max().unwrap_or(0));
            rows_used = rows_used.min((2 - low).max(0) as usize);
            for p in low..=2 {
                let vp = v.get(p);
                for comp in 0..n {
                    let mut r = match vp {
                        Some(row) => row[comp].clone(),
                        None => TruncatedSeries::zero(m, cap),
                    };
                    for (k, ck) in coeffs.iter().enumerate() {
                        if let Some(col) = cols[k].get(p) {
                            r = &r - &(ck * &col[comp]);
                        }
                    }
                    residual = residual.max(r.max_abs() / scale);
                }
            }
            c[a][b] = coeffs.clone();
            c[b][a] = coeffs;
        }
    }
    Ok(Extraction {
        constants: StructureConstants {
            side: flat.side,
            n,
            lambda: flat.lambda,
            degree_cap: cap,
            c,
        },
        flatness_defect: flat.flatness_defect,
        qde_residual: residual,
        residual_rows: if rows_used == usize::MAX { 0 } else { rows_used },
    })
}

/// Builds the I-function, moves to flat coordinates and extracts.
pub fn structure_constants(
    side: Space,
    n: usize,
    lambda: LambdaPair,
    degree: usize,
    z_order: usize,
) -> Result<Extraction> {
    let i = match side {
        // two u-derivatives cost two degrees on 𝒳
        Space::Orbifold => i_function_x(n, degree + 2, z_order, ZERO, lambda)?,
        Space::Resolution => i_function_y(n, degree, z_order, ZERO, lambda)?,
    };
    extract_structure_constants(&to_flat_coordinates(&i)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub z_orders: Vec<usize>,
    /// largest change of any coefficient relative to the base extraction
    pub drift: f64,
}

/// Re-extracts with `Z + 1` and `Z + 2` and measures the drift.
pub fn extraction_stability(
    side: Space,
    n: usize,
    lambda: LambdaPair,
    degree: usize,
    z_order: usize,
) -> Result<StabilityReport> {
    let orders = vec![z_order, z_order + 1, z_order + 2];
    let runs = orders
        .par_iter()
        .map(|&z| structure_constants(side, n, lambda, degree, z))
        .collect::<Result<Vec<_>>>()?;
    let base = &runs[0].constants;
    let scale = base.max_abs().max(1e-300);
    let mut drift: f64 = 0.0;
    for r in &runs[1..] {
        drift = drift.max(base.distance(&r.constants)? / scale);
    }
    Ok(StabilityReport { z_orders: orders, drift })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrobeniusReport {
    pub side: Space,
    pub n: usize,
    pub degree_cap: usize,
    /// `max |c_{ijk} − c_{ikj}|` relative, with `c_{ijk} = Σ_l c_{ij}^l (e_l, e_k)`
    pub symmetry: f64,
    /// `max |Σ_l c_{ij}^l c_{lk}^m − Σ_l c_{jk}^l c_{il}^m|` relative
    pub associativity: f64,
    /// `max |c_{ij}^k − c_{ji}^k|`
    pub commutativity: f64,
    /// `max |c_{0j}^k − δ_{jk}|`
    pub unit: f64,
}

/// Pairing compatibility, associativity, commutativity and the unit axiom.
pub fn frobenius_check(c: &StructureConstants, gram: &CMatrix) -> Result<FrobeniusReport> {
    let n = c.n;
    if gram.nrows() != n || gram.ncols() != n {
        return Err(Error::Shape("Gram matrix does not match the rank".into()));
    }
    let m = n - 1;
    let cap = c.degree_cap;
    let scale = c.max_abs().max(1e-300);
    let lowered: Vec<Vec<Vec<TruncatedSeries>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..n)
                        .map(|k| linear_combination((0..n).map(|l| (gram[(l, k)], c.c[i][j][l].clone())), m, cap))
                        .collect()
                })
                .collect()
        })
        .collect();
    let lscale = lowered.iter().flatten().flatten().map(TruncatedSeries::max_abs).fold(0.0, f64::max).max(1e-300);
    let mut symmetry: f64 = 0.0;
    let mut commutativity: f64 = 0.0;
    let mut unit: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                symmetry = symmetry.max(lowered[i][j][k].try_sub(&lowered[i][k][j])?.max_abs() / lscale);
                commutativity = commutativity.max(c.c[i][j][k].try_sub(&c.c[j][i][k])?.max_abs());
            }
        }
    }
    for j in 0..n {
        for k in 0..n {
            let want = if j == k { ONE } else { ZERO };
            let d = &c.c[0][j][k] - &TruncatedSeries::constant(m, cap, want);
            unit = unit.max(d.max_abs());
        }
    }
    let triples: Vec<(usize, usize, usize)> = (0..n)
        .flat_map(|i| (0..n).flat_map(move |j| (0..n).map(move |k| (i, j, k))))
        .collect();
    let associativity = triples
        .par_iter()
        .map(|&(i, j, k)| {
            let mut worst: f64 = 0.0;
            for mm in 0..n {
                let mut lhs = TruncatedSeries::zero(m, cap);
                let mut rhs = TruncatedSeries::zero(m, cap);
                for l in 0..n {
                    lhs = &lhs + &(&c.c[i][j][l] * &c.c[l][k][mm]);
                    rhs = &rhs + &(&c.c[j][k][l] * &c.c[i][l][mm]);
                }
                worst = worst.max((&lhs - &rhs).max_abs());
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
        / (scale * scale);
    Ok(FrobeniusReport {
        side: c.side,
        n,
        degree_cap: cap,
        symmetry,
        associativity,
        commutativity,
        unit,
    })
}

/// Gram matrix of the pairing on the given side.
pub fn gram(side: Space, n: usize, lambda: LambdaPair) -> Result<CMatrix> {
    match side {
        Space::Orbifold => {
            lambda.check_nondegenerate(n)?;
            Ok(gram_x(n, &lambda))
        }
        Space::Resolution => Ok(FixedPointData::new(n, lambda)?.gram_y()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaModelReport {
    pub side: Space,
    pub n: usize,
    pub degree: usize,
    pub samples: Vec<LambdaPair>,
    /// largest misfit on the held-out sample, relative to the entry scale
    pub validation_defect: f64,
    /// largest misfit on the fitting samples
    pub fit_defect: f64,
    /// largest entry that should vanish for grading reasons
    pub forbidden: f64,
}

fn grade(k: usize) -> i32 {
    if k == 0 {
        0
    } else {
        1
    }
}

/// Fits every coefficient of every `c_{ij}^k` by a homogeneous polynomial in
/// `(λ₁, λ₂)` of degree `deg e_i + deg e_j − deg e_k` (all of `δ_{k>0}`,
/// `γ_{k>0}` have degree 1, `u` and `q` degree 0) on the first three samples
/// and checks the fourth.
pub fn lambda_model_check(
    side: Space,
    n: usize,
    degree: usize,
    samples: &[LambdaPair],
) -> Result<LambdaModelReport> {
    if samples.len() < 4 {
        return Err(Error::Domain("need at least four lambda samples".into()));
    }
    let runs = samples
        .par_iter()
        .map(|&l| structure_constants(side, n, l, degree, 3).map(|e| e.constants))
        .collect::<Result<Vec<_>>>()?;
    let scale = runs.iter().map(StructureConstants::max_abs).fold(0.0, f64::max).max(1e-300);
    let nfit = 3;
    let mut fit_defect: f64 = 0.0;
    let mut validation: f64 = 0.0;
    let mut forbidden: f64 = 0.0;
    let nmon = runs[0].c[0][0][0].coeffs().len();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let d = grade(i) + grade(j) - grade(k);
                for idx in 0..nmon {
                    let vals: Vec<Complex64> = runs.iter().map(|r| r.c[i][j][k].coeffs()[idx]).collect();
                    if d < 0 {
                        forbidden = forbidden.max(vals.iter().map(|v| v.norm()).fold(0.0, f64::max) / scale);
                        continue;
                    }
                    let d = d as usize;
                    let design = |l: &LambdaPair| -> Vec<Complex64> {
                        (0..=d).map(|a| l.l1.powu(a as u32) * l.l2.powu((d - a) as u32)).collect()
                    };
                    let a = CMatrix::from_fn(nfit, d + 1, |r, col| design(&samples[r])[col]);
                    let b = nalgebra::DVector::from_iterator(nfit, vals[..nfit].iter().cloned());
                    let coef = a
                        .clone()
                        .svd(true, true)
                        .solve(&b, 1e-14)
                        .map_err(|e| Error::SingularSolve(e.to_string()))?;
                    for (r, l) in samples.iter().enumerate() {
                        let pred: Complex64 = design(l).iter().zip(coef.iter()).map(|(x, y)| x * y).sum();
                        let err = (pred - vals[r]).norm() / scale;
                        if r < nfit {
                            fit_defect = fit_defect.max(err);
                        } else {
                            validation = validation.max(err);
                        }
                    }
                }
            }
        }
    }
    Ok(LambdaModelReport {
        side,
        n,
        degree,
        samples: samples.to_vec(),
        validation_defect: validation,
        fit_defect,
        forbidden,
    })
}

/// `P(s)/Q(s)`, coefficients ascending, `Q(0) = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalFunction {
    pub numerator: Vec<Complex64>,
    pub denominator: Vec<Complex64>,
}

impl RationalFunction {
    pub fn eval(&self, s: Complex64) -> Complex64 {
        let horner = |c: &[Complex64]| c.iter().rev().fold(ZERO, |acc, &v| acc * s + v);
        horner(&self.numerator) / horner(&self.denominator)
    }

    /// Taylor coefficients `0..len`.
    pub fn taylor(&self, len: usize) -> Vec<Complex64> {
        let mut out = vec![ZERO; len];
        for k in 0..len {
            let mut v = self.numerator.get(k).copied().unwrap_or(ZERO);
            for j in 1..self.denominator.len().min(k + 1) {
                v -= self.denominator[j] * out[k - j];
            }
            out[k] = v;
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub function: RationalFunction,
    pub p: usize,
    pub q: usize,
    pub held_out: usize,
    /// largest relative misfit on the held-out coefficients
    pub validation_defect: f64,
}

/// Relative tolerance for held-out coefficients.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;

/// `[p/q]` Padé approximant of `Σ a_k s^k`, validated on every coefficient
/// past `a_{p+q}` (at least two are required).
pub fn rational_reconstruct(coeffs: &[Complex64], p: usize, q: usize) -> Result<Reconstruction> {
    rational_reconstruct_scaled(coeffs, p, q, 0.0)
}

/// As [`rational_reconstruct`], with misfits measured against
/// `max(max_k |a_k|, floor)`. A family of series sharing one scale passes that
/// scale here so that entries which vanish up to rounding are accepted.
pub fn rational_reconstruct_scaled(
    coeffs: &[Complex64],
    p: usize,
    q: usize,
    floor: f64,
) -> Result<Reconstruction> {
    let len = coeffs.len();
    if len < p + q + 3 {
        return Err(Error::Domain(format!(
            "[{p}/{q}] reconstruction needs {} coefficients, got {len}",
            p + q + 3
        )));
    }
    let a = |k: i64| if k < 0 { ZERO } else { coeffs[k as usize] };
    let mut den = vec![ONE];
    if q > 0 {
        let mat = CMatrix::from_fn(q, q, |r, c| a((p + 1 + r) as i64 - (c + 1) as i64));
        let rhs = nalgebra::DVector::from_iterator(q, (0..q).map(|r| -a((p + 1 + r) as i64)));
        let b = mat
            .svd(true, true)
            .solve(&rhs, 1e-13)
            .map_err(|e| Error::SingularSolve(e.to_string()))?;
        den.extend(b.iter().copied());
    }
    let num: Vec<Complex64> = (0..=p)
        .map(|k| (0..=q.min(k)).map(|j| den[j] * a((k - j) as i64)).sum())
        .collect();
    let function = RationalFunction {
        numerator: num,
        denominator: den,
    };
    let pred = function.taylor(len);
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
    let defect = (p + q + 1..len)
        .map(|k| (pred[k] - coeffs[k]).norm() / scale.max(floor))
        .fold(0.0, f64::max);
    if !defect.is_finite() || defect > RECONSTRUCTION_TOL {
        return Err(Error::Inconclusive(format!(
            "[{p}/{q}] approximant misses held-out coefficients by {defect:e}"
        )));
    }
    Ok(Reconstruction {
        function,
        p,
        q,
        held_out: len - (p + q + 1),
        validation_defect: defect,
    })
}

/// Smallest `p + q` whose approximant passes validation.
pub fn rational_reconstruct_auto(coeffs: &[Complex64], floor: f64) -> Result<Reconstruction> {
    let len = coeffs.len();
    if len < 3 {
        return Err(Error::Domain("need at least three coefficients".into()));
    }
    for total in 0..=len - 3 {
        for q in 0..=total {
            if let Ok(r) = rational_reconstruct_scaled(coeffs, total - q, q, floor) {
                return Ok(r);
            }
        }
    }
    Err(Error::Inconclusive(format!(
        "no rational function of total degree ≤ {} reproduces the held-out coefficients",
        len - 3
    )))
}

/// Coefficients of `f(s, s, …, s)`.
pub fn diagonal(f: &TruncatedSeries) -> Vec<Complex64> {
    let mut out = vec![ZERO; f.degree_cap() + 1];
    for (e, c) in f.terms() {
        out[e.iter().sum::<u32>() as usize] += c;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorollaryReport {
    pub n: usize,
    pub lambda: LambdaPair,
    pub degree: usize,
    /// `exp(−2π√−1/n)`
    pub specialization: Complex64,
    /// `δ_i ⋆ δ_j` at `u = 0`, `x_products[i]` has entry `(k, j)`
    pub x_products: Vec<Vec<Vec<Complex64>>>,
    /// `γ_i ⋆ γ_j` at `q_i = exp(−2π√−1/n)`
    pub y_products: Vec<Vec<Vec<Complex64>>>,
    /// `max |L(δ_i ⋆ δ_j) − Lδ_i ⋆ Lδ_j|` relative
    pub product_error: f64,
    /// `max |(Lδ_a, Lδ_b)_Y − (δ_a, δ_b)_𝒳|` relative
    pub pairing_error: f64,
    /// `max |c_{0j}^k − δ_{jk}|` over both sides
    pub unit_error: f64,
    /// largest held-out misfit among the accepted reconstructions
    pub reconstruction_defect: f64,
    /// largest `p + q` used
    pub max_rational_degree: usize,
    pub inconclusive: Option<String>,
}

fn max_norm(m: &CMatrix) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn to_nested(ms: &[CMatrix]) -> Vec<Vec<Vec<Complex64>>> {
    ms.iter()
        .map(|m| (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect()).collect())
        .collect()
}

/// Small quantum products of `Y` continued to `q_i = exp(−2π√−1/n)` through
/// validated rational reconstruction along `q_1 = ⋯ = q_{n−1} = s`, then
/// compared with the `𝒳` products at `u = 0` after conjugation by `L`.
pub fn corollary_check(n: usize, lambda: LambdaPair, degree: usize) -> Result<CorollaryReport> {
    if n < 2 {
        return Err(Error::Domain("n must be at least 2".into()));
    }
    let (x, y) = rayon::join(
        || structure_constants(Space::Orbifold, n, lambda, 2, 3),
        || structure_constants(Space::Resolution, n, lambda, degree, 3),
    );
    let x = x?.constants;
    let y = y?.constants;
    let cx = x.matrices_at_origin();
    let star = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI / n as f64);
    let floor = y.max_abs();
    let mut cy = vec![CMatrix::zeros(n, n); n];
    let mut defect: f64 = 0.0;
    let mut max_deg = 0;
    let mut inconclusive = None;
    'outer: for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let coeffs = diagonal(&y.c[i][j][k]);
                match rational_reconstruct_auto(&coeffs, floor) {
                    Ok(r) => {
                        defect = defect.max(r.validation_defect);
                        max_deg = max_deg.max(r.p + r.q);
                        cy[i][(k, j)] = r.function.eval(star);
                    }
                    Err(Error::Inconclusive(msg)) => {
                        inconclusive = Some(format!("entry ({i},{j},{k}): {msg}"));
                        break 'outer;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
    let l = l_matrix(n);
    let gx = gram(Space::Orbifold, n, lambda)?;
    let gy = gram(Space::Resolution, n, lambda)?;
    let pulled = l.transpose() * &gy * &l;
    let pairing_error = max_norm(&(&pulled - &gx)) / max_norm(&gx);
    let mut unit_error: f64 = 0.0;
    for (ms, _) in [(&cx, 'x'), (&cy, 'y')] {
        unit_error = unit_error.max(max_norm(&(&ms[0] - CMatrix::identity(n, n))));
    }
    let mut product_error = f64::NAN;
    if inconclusive.is_none() {
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 0..n {
            let lhs = &l * &cx[i];
            let mut op = CMatrix::zeros(n, n);
            for (mm, cym) in cy.iter().enumerate() {
                op += cym * l[(mm, i)];
            }
            let rhs = op * &l;
            worst = worst.max(max_norm(&(&lhs - &rhs)));
            scale = scale.max(max_norm(&lhs));
        }
        product_error = worst / scale.max(1e-300);
    }
    Ok(CorollaryReport {
        n,
        lambda,
        degree,
        specialization: star,
        x_products: to_nested(&cx),
        y_products: to_nested(&cy),
        product_error,
        pairing_error,
        unit_error,
        reconstruction_defect: defect,
        max_rational_degree: max_deg,
        inconclusive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lam() -> LambdaPair {
        LambdaPair::real(0.7, -1.3)
    }

    #[test]
    fn x_side_rows_become_flat() {
        let i = i_function_x(3, 6, 3, ZERO, lam()).unwrap();
        let f = to_flat_coordinates(&i).unwrap();
        assert!(f.flatness_defect < 1e-13, "{}", f.flatness_defect);
    }

    #[test]
    fn y_side_rows_become_flat() {
        for n in 2..5 {
            let i = i_function_y(n, 6, 3, ZERO, lam()).unwrap();
            let f = to_flat_coordinates(&i).unwrap();
            assert!(f.flatness_defect < 1e-11, "n={n}: {}", f.flatness_defect);
        }
    }

    #[test]
    fn n2_orbifold_square() {
        let e = structure_constants(Space::Orbifold, 2, lam(), 4, 3).unwrap();
        let c = &e.constants;
        let l = lam();
        assert!((c.entry(1, 1, 0).constant_term() - l.l1 * l.l2).norm() < 1e-13);
        assert!(c.entry(1, 1, 1).constant_term().norm() < 1e-13);
        assert!(e.qde_residual < 1e-12, "{}", e.qde_residual);
    }

    #[test]
    fn y_side_at_q0_is_the_cup_product() {
        let n = 3;
        let l = lam();
        let fp = FixedPointData::new(n, l).unwrap();
        let e = structure_constants(Space::Resolution, n, l, 4, 3).unwrap();
        for i in 0..n {
            for j in 0..n {
                let a = crate::cohomology::CohomologyClass::basis(Space::Resolution, n, i, l);
                let b = crate::cohomology::CohomologyClass::basis(Space::Resolution, n, j, l);
                let cup = fp.cup(&a, &b).unwrap();
                for k in 0..n {
                    let got = e.constants.entry(i, j, k).constant_term();
                    assert!((got - cup.coeffs[k]).norm() < 1e-12, "{i}{j}{k}: {got} vs {}", cup.coeffs[k]);
                }
            }
        }
        assert!(e.qde_residual < 1e-10, "{}", e.qde_residual);
    }

    #[test]
    fn frobenius_axioms_small() {
        for side in [Space::Orbifold, Space::Resolution] {
            let e = structure_constants(side, 3, lam(), 4, 3).unwrap();
            let g = gram(side, 3, lam()).unwrap();
            let r = frobenius_check(&e.constants, &g).unwrap();
            assert_eq!(r.commutativity, 0.0);
            assert!(r.unit < 1e-12, "{r:?}");
            assert!(r.symmetry < 1e-10, "{r:?}");
            assert!(r.associativity < 1e-10, "{r:?}");
        }
    }

    #[test]
    fn pade_recovers_simple_functions() {
        let c = [Complex64::from(2.5); 1];
        assert!(rational_reconstruct_auto(&[c[0], ZERO, ZERO, ZERO], 0.0).is_ok());
        let geo = vec![ONE; 8];
        let r = rational_reconstruct_auto(&geo, 0.0).unwrap();
        assert_eq!((r.p, r.q), (0, 1));
        assert!((r.function.eval(Complex64::from(-1.0)) - 0.5).norm() < 1e-14);
        // too few coefficients to validate anything beyond the data
        let noisy: Vec<Complex64> = (0..6).map(|k| Complex64::from(1.0 / (1.0 + (k * k) as f64).sqrt())).collect();
        assert!(matches!(rational_reconstruct_auto(&noisy, 0.0), Err(Error::Inconclusive(_))));
    }

    #[test]
    fn n2_corollary() {
        let r = corollary_check(2, lam(), 8).unwrap();
        assert!(r.inconclusive.is_none(), "{r:?}");
        assert!(r.product_error < 1e-6, "{r:?}");
        assert!(r.pairing_error < 1e-12);
        // γ₁⋆γ₁ at q = −1 lands on −λ₁λ₂γ₀
        let l = lam();
        assert!((r.y_products[1][0][1] + l.l1 * l.l2).norm() < 1e-8);
    }

    #[test]
    fn n3_corollary() {
        let r = corollary_check(3, LambdaPair::real(0.45, 1.7), 8).unwrap();
        assert!(r.inconclusive.is_none(), "{r:?}");
        assert!(r.product_error < 1e-6, "{r:?}");
    }

    #[test]
    fn stability_under_window_growth() {
        for side in [Space::Orbifold, Space::Resolution] {
            let s = extraction_stability(side, 3, lam(), 4, 3).unwrap();
            assert!(s.drift < 1e-9, "{side:?} {s:?}");
        }
    }

    #[test]
    fn lambda_model_holds() {
        let samples = [(0.7, -1.3), (1.1, 0.4), (-0.6, 2.2), (1.9, -0.8)].map(|(a, b)| LambdaPair::real(a, b));
        for side in [Space::Orbifold, Space::Resolution] {
            let r = lambda_model_check(side, 3, 4, &samples).unwrap();
            assert!(r.validation_defect < 1e-8, "{r:?}");
            assert!(r.forbidden < 1e-12, "{r:?}");
        }
    }
}
