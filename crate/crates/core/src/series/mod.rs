//! Dense multivariate power series truncated in total degree.
//!
//! A [`TruncatedSeries`] stores one complex coefficient per monomial of total
//! degree `≤ D`, in the graded-lex order of its [`MonomialBasis`]. All ring
//! operations are closed under the cap: anything that would land above `D` is
//! dropped.

mod basis;
mod special;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use basis::MonomialBasis;
pub use special::reciprocal_gamma;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Exponent vector of a monomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn new(exps: Vec<u32>) -> Self {
        MultiIndex(exps)
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }
}

#[derive(Clone)]
pub struct TruncatedSeries {
    basis: Arc<MonomialBasis>,
    coeffs: Vec<Complex64>,
}

impl fmt::Debug for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<_> = self
            .terms()
            .map(|(e, c)| format!("{c}·x^{e:?}"))
            .collect();
        f.debug_struct("TruncatedSeries")
            .field("nvars", &self.nvars())
            .field("degree_cap", &self.degree_cap())
            .field("terms", &terms)
            .finish()
    }
}

impl PartialEq for TruncatedSeries {
    fn eq(&self, other: &Self) -> bool {
        self.same_shape(other) && self.coeffs == other.coeffs
    }
}

impl TruncatedSeries {
    pub fn zero(nvars: usize, cap: usize) -> Self {
        let basis = MonomialBasis::shared(nvars, cap);
        let coeffs = vec![ZERO; basis.len()];
        TruncatedSeries { basis, coeffs }
    }

    pub fn constant(nvars: usize, cap: usize, c: Complex64) -> Self {
        let mut s = Self::zero(nvars, cap);
        s.coeffs[0] = c;
        s
    }

    pub fn one(nvars: usize, cap: usize) -> Self {
        Self::constant(nvars, cap, ONE)
    }

    /// The coordinate function `x_i` (0-based).
    pub fn variable(nvars: usize, cap: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(nvars, cap, &e, ONE)
    }

    /// `c · x^e`, or zero if the monomial exceeds the cap.
    pub fn monomial(nvars: usize, cap: usize, exps: &[u32], c: Complex64) -> Self {
        let mut s = Self::zero(nvars, cap);
        if let Some(i) = s.basis.index_of(exps) {
            s.coeffs[i] = c;
        }
        s
    }

    pub fn from_coeffs(basis: Arc<MonomialBasis>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::Shape(format!(
                "{} coefficients for a basis of size {}",
                coeffs.len(),
                basis.len()
            )));
        }
        Ok(TruncatedSeries { basis, coeffs })
    }

    pub fn nvars(&self) -> usize {
        self.basis.nvars()
    }

    pub fn degree_cap(&self) -> usize {
        self.basis.cap()
    }

    pub fn basis(&self) -> &Arc<MonomialBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.basis, &other.basis)
            || (self.nvars() == other.nvars() && self.degree_cap() == other.degree_cap())
    }

    fn check_shape(&self, other: &Self, op: &str) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "{op}: ({} vars, cap {}) vs ({} vars, cap {})",
                self.nvars(),
                self.degree_cap(),
                other.nvars(),
                other.degree_cap()
            )))
        }
    }

    /// Coefficient of `x^e`; zero for monomials above the cap.
    pub fn coeff(&self, exps: &[u32]) -> Complex64 {
        self.basis
            .index_of(exps)
            .map(|i| self.coeffs[i])
            .unwrap_or(ZERO)
    }

    pub fn set_coeff(&mut self, exps: &[u32], c: Complex64) -> Result<()> {
        let i = self.basis.index_of(exps).ok_or_else(|| {
            Error::OutOfRange(format!(
                "monomial {exps:?} is outside ({} vars, cap {})",
                self.nvars(),
                self.degree_cap()
            ))
        })?;
        self.coeffs[i] = c;
        Ok(())
    }

    pub fn constant_term(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Nonzero terms in graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&[u32], Complex64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != ZERO)
            .map(move |(i, c)| (self.basis.exponents(i), *c))
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn ensure_finite(self, origin: &str) -> Result<Self> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(Error::NonFinite(origin.to_string()))
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        TruncatedSeries {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().map(|&a| a * c).collect(),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other, "add")?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_shape(other, "sub")?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_shape(other, "mul")?;
        Ok(self.mul_unchecked(other))
    }

    /// `self += c · other`.
    pub fn add_scaled(&mut self, other: &Self, c: Complex64) {
        assert!(self.same_shape(other), "add_scaled: shape mismatch");
        for (a, &b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += c * b;
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        TruncatedSeries {
            basis: self.basis.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let table = self.basis.products();
        let mut out = vec![ZERO; self.coeffs.len()];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == ZERO {
                continue;
            }
            for &(j, k) in &table[i] {
                let b = other.coeffs[j as usize];
                if b != ZERO {
                    out[k as usize] += a * b;
                }
            }
        }
        TruncatedSeries {
            basis: self.basis.clone(),
            coeffs: out,
        }
    }

    /// Applies a diagonal operator `x^e ↦ f(e) x^e`.
    pub fn map_monomials(&self, f: impl Fn(&[u32]) -> Complex64) -> Self {
        TruncatedSeries {
            basis: self.basis.clone(),
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| {
                    if c == ZERO {
                        ZERO
                    } else {
                        c * f(self.basis.exponents(i))
                    }
                })
                .collect(),
        }
    }

    /// Euler operator `x_i ∂/∂x_i`.
    pub fn euler(&self, i: usize) -> Self {
        self.map_monomials(|e| Complex64::from(e[i] as f64))
    }

    /// `Σ_i w_i x_i ∂/∂x_i`.
    pub fn weighted_euler(&self, weights: &[f64]) -> Self {
        assert_eq!(weights.len(), self.nvars());
        self.map_monomials(|e| {
            Complex64::from(e.iter().zip(weights).map(|(&k, &w)| k as f64 * w).sum::<f64>())
        })
    }

    /// `∂/∂x_i`. The result has cap `D − 1`, the last degree it knows exactly.
    pub fn derivative(&self, i: usize) -> Self {
        let cap = self.degree_cap().saturating_sub(1);
        let mut out = Self::zero(self.nvars(), cap);
        if self.degree_cap() == 0 {
            return out;
        }
        let mut buf = vec![0u32; self.nvars()];
        for (idx, &c) in self.coeffs.iter().enumerate() {
            let e = self.basis.exponents(idx);
            if c == ZERO || e[i] == 0 {
                continue;
            }
            buf.copy_from_slice(e);
            buf[i] -= 1;
            let k = out.basis.index_of(&buf).expect("degree drops by one");
            out.coeffs[k] = c * e[i] as f64;
        }
        out
    }

    /// Re-caps the series, dropping terms above `cap` or padding with zeros.
    pub fn with_cap(&self, cap: usize) -> Self {
        if cap == self.degree_cap() {
            return self.clone();
        }
        let mut out = Self::zero(self.nvars(), cap);
        let n = out.coeffs.len().min(self.coeffs.len());
        out.coeffs[..n].copy_from_slice(&self.coeffs[..n]);
        out
    }

    /// Multiplies by the monomial `x^e`, dropping what falls above the cap.
    pub fn shift(&self, exps: &[u32]) -> Self {
        let mut out = Self::zero(self.nvars(), self.degree_cap());
        let mut buf = vec![0u32; self.nvars()];
        for (idx, &c) in self.coeffs.iter().enumerate() {
            if c == ZERO {
                continue;
            }
            let e = self.basis.exponents(idx);
            for v in 0..buf.len() {
                buf[v] = e[v] + exps[v];
            }
            if let Some(k) = out.basis.index_of(&buf) {
                out.coeffs[k] = c;
            }
        }
        out
    }

    pub fn homogeneous_part(&self, d: usize) -> Self {
        let mut out = Self::zero(self.nvars(), self.degree_cap());
        for i in self.basis.degree_range(d) {
            out.coeffs[i] = self.coeffs[i];
        }
        out
    }

    /// Evaluates the truncated polynomial at a point.
    pub fn eval(&self, point: &[Complex64]) -> Complex64 {
        assert_eq!(point.len(), self.nvars(), "eval: point dimension");
        let cap = self.degree_cap();
        let powers: Vec<Vec<Complex64>> = point
            .iter()
            .map(|&p| {
                let mut v = Vec::with_capacity(cap + 1);
                let mut acc = ONE;
                for _ in 0..=cap {
                    v.push(acc);
                    acc *= p;
                }
                v
            })
            .collect();
        let mut sum = ZERO;
        for (idx, &c) in self.coeffs.iter().enumerate() {
            if c == ZERO {
                continue;
            }
            let e = self.basis.exponents(idx);
            let mut m = c;
            for (v, &k) in e.iter().enumerate() {
                m *= powers[v][k as usize];
            }
            sum += m;
        }
        sum
    }

    /// Formal composition `self(inner_1, …, inner_m)`.
    ///
    /// Every inner series must have zero constant term and they must share a
    /// ring; the result lives in that ring, capped at `min(D_outer, D_inner)`.
    pub fn compose(&self, inner: &[TruncatedSeries]) -> Result<Self> {
        if inner.len() != self.nvars() {
            return Err(Error::Shape(format!(
                "compose: {} inner series for {} variables",
                inner.len(),
                self.nvars()
            )));
        }
        let Some(first) = inner.first() else {
            return Ok(Self::constant(0, self.degree_cap(), self.constant_term()));
        };
        for s in inner {
            first.check_shape(s, "compose")?;
            if s.constant_term().norm() != 0.0 {
                return Err(Error::Domain(format!(
                    "compose: inner series has constant term {}",
                    s.constant_term()
                )));
            }
        }
        let cap = self.degree_cap().min(first.degree_cap());
        let inner: Vec<Self> = inner.iter().map(|s| s.with_cap(cap)).collect();
        let mut out = Self::zero(first.nvars(), cap);
        let mut exps = vec![0u32; self.nvars()];
        let one = Self::one(first.nvars(), cap);
        compose_rec(self, &inner, 0, cap as u32, &one, &mut exps, &mut out);
        out.ensure_finite("compose")
    }

    /// `exp(self)`; the constant term is exponentiated exactly.
    pub fn exp(&self) -> Self {
        let c0 = self.constant_term();
        let mut nil = self.clone();
        nil.coeffs[0] = ZERO;
        let mut out = Self::one(self.nvars(), self.degree_cap());
        let mut term = out.clone();
        for m in 1..=self.degree_cap() {
            term = term.mul_unchecked(&nil).scale(Complex64::from(1.0 / m as f64));
            out.add_scaled(&term, ONE);
        }
        out.scale(c0.exp())
    }
}

fn compose_rec(
    outer: &TruncatedSeries,
    inner: &[TruncatedSeries],
    var: usize,
    budget: u32,
    prefix: &TruncatedSeries,
    exps: &mut Vec<u32>,
    out: &mut TruncatedSeries,
) {
    if var == inner.len() {
        if let Some(i) = outer.basis.index_of(exps) {
            let c = outer.coeffs[i];
            if c != ZERO {
                out.add_scaled(prefix, c);
            }
        }
        return;
    }
    let mut power = prefix.clone();
    for e in 0..=budget {
        exps[var] = e;
        compose_rec(outer, inner, var + 1, budget - e, &power, exps, out);
        if e < budget {
            power = power.mul_unchecked(&inner[var]);
        }
    }
    exps[var] = 0;
}

/// Inverts a map `u_i = f_i(x) = x_i + O(x²)`, returning `x_i(u)` such that
/// `f(x(u)) = u` through the common degree cap.
pub fn reverse(maps: &[TruncatedSeries]) -> Result<Vec<TruncatedSeries>> {
    let m = maps.len();
    let Some(first) = maps.first() else {
        return Ok(Vec::new());
    };
    for (i, f) in maps.iter().enumerate() {
        first.check_shape(f, "reverse")?;
        if f.nvars() != m {
            return Err(Error::Shape(format!(
                "reverse: {m} maps in {} variables",
                f.nvars()
            )));
        }
        if f.constant_term().norm() > 1e-12 {
            return Err(Error::Domain(format!(
                "reverse: map {i} has constant term {}",
                f.constant_term()
            )));
        }
        if f.degree_cap() == 0 {
            continue;
        }
        for j in 0..m {
            let mut e = vec![0u32; m];
            e[j] = 1;
            let want = if i == j { ONE } else { ZERO };
            if (f.coeff(&e) - want).norm() > 1e-12 {
                return Err(Error::Domain(format!(
                    "reverse: Jacobian at 0 is not the identity (entry {i},{j} = {})",
                    f.coeff(&e)
                )));
            }
        }
    }
    let cap = first.degree_cap();
    let vars: Vec<TruncatedSeries> = (0..m)
        .map(|i| TruncatedSeries::variable(m, cap, i))
        .collect();
    // nonlinear parts N_i = f_i − x_i
    let nonlinear: Vec<TruncatedSeries> = maps
        .iter()
        .zip(&vars)
        .map(|(f, x)| {
            let mut n = f - x;
            n.coeffs[0] = ZERO;
            n
        })
        .collect();
    let mut x = vars.clone();
    // each pass fixes one more degree of x(u)
    for _ in 1..cap {
        let mut next = Vec::with_capacity(m);
        for (i, n) in nonlinear.iter().enumerate() {
            next.push(&vars[i] - &n.compose(&x)?);
        }
        x = next;
    }
    Ok(x)
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, rhs: Self) -> TruncatedSeries {
        self.try_add(rhs).expect("series add")
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: Self) -> TruncatedSeries {
        self.try_sub(rhs).expect("series sub")
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: Self) -> TruncatedSeries {
        self.try_mul(rhs).expect("series mul")
    }
}

impl Mul<Complex64> for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: Complex64) -> TruncatedSeries {
        self.scale(rhs)
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        self.scale(-ONE)
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    exps: Vec<u32>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct SeriesRepr {
    nvars: usize,
    degree_cap: usize,
    terms: Vec<TermRepr>,
}

impl Serialize for TruncatedSeries {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SeriesRepr {
            nvars: self.nvars(),
            degree_cap: self.degree_cap(),
            terms: self
                .terms()
                .map(|(e, c)| TermRepr {
                    exps: e.to_vec(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TruncatedSeries {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = SeriesRepr::deserialize(deserializer)?;
        let mut s = TruncatedSeries::zero(repr.nvars, repr.degree_cap);
        for t in repr.terms {
            if t.exps.len() != repr.nvars {
                return Err(serde::de::Error::custom(format!(
                    "term {:?} has the wrong number of exponents",
                    t.exps
                )));
            }
            s.set_coeff(&t.exps, Complex64::new(t.re, t.im))
                .map_err(serde::de::Error::custom)?;
        }
        Ok(s)
    }
}
