//! Roots of `W_𝒳` and `W_Y`, their labeling near the two large-radius
//! points, and branch-tracked logarithms along the two-leg path joining
//! them.
//!
//! On both legs the root trajectories are known in closed form. The
//! polynomial coefficients are rebuilt from them through elementary
//! symmetric functions, the roots are then solved for numerically at every
//! step and matched to the previous step, so the tracked labels and
//! logarithms come from the solver and the closed form only serves as a
//! cross-check.

use std::f64::consts::PI;

use nalgebra::linalg::Schur;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cohomology::{l_entry, zeta};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::mirror::{change_coordinates, flat_coords_x, s_series, Chart};
use crate::series::TruncatedSeries;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest number of steps a single leg may be refined to.
pub const MAX_STEPS: usize = 1 << 20;

/// A monic polynomial of degree `n`, coefficients in ascending order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyW {
    pub side: Chart,
    pub coeffs: Vec<Complex64>,
}

impl PolyW {
    /// `W_𝒳(κ) = κⁿ + x_{n−1}κ^{n−1} + ⋯ + x₁κ + 1`.
    pub fn x_side(x: &[Complex64]) -> Self {
        let mut coeffs = Vec::with_capacity(x.len() + 2);
        coeffs.push(ONE);
        coeffs.extend_from_slice(x);
        coeffs.push(ONE);
        PolyW {
            side: Chart::X,
            coeffs,
        }
    }

    /// `W_Y(μ) = μⁿ + μ^{n−1} + y₁μ^{n−2} + y₁²y₂μ^{n−3} + ⋯`; the coefficient
    /// of `μ^{n−1−k}` is `Π_{i≤k} y_i^{k+1−i}`.
    pub fn y_side(y: &[Complex64]) -> Self {
        let n = y.len() + 1;
        let mut coeffs = vec![ZERO; n + 1];
        coeffs[n] = ONE;
        coeffs[n - 1] = ONE;
        let mut q = ONE;
        let mut p = ONE;
        for k in 1..n {
            p *= y[k - 1];
            q *= p;
            coeffs[n - 1 - k] = q;
        }
        PolyW {
            side: Chart::Y,
            coeffs,
        }
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(side: Chart, roots: &[Complex64]) -> Self {
        let mut coeffs = vec![ONE];
        for &r in roots {
            coeffs.insert(0, ZERO);
            for k in 0..coeffs.len() - 1 {
                let next = coeffs[k + 1];
                coeffs[k] -= r * next;
            }
        }
        PolyW { side, coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn scale(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, t: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * t + c)
    }

    fn eval_with_derivative(&self, t: Complex64) -> (Complex64, Complex64) {
        let mut p = ZERO;
        let mut dp = ZERO;
        for &c in self.coeffs.iter().rev() {
            dp = dp * t + p;
            p = p * t + c;
        }
        (p, dp)
    }

    /// `x` from the coefficients of a `W_𝒳`-shaped polynomial.
    pub fn x_coordinates(&self) -> Vec<Complex64> {
        self.coeffs[1..self.degree()].to_vec()
    }

    /// `y` from the coefficients of a `W_Y`-shaped polynomial:
    /// `y_k = P_k/P_{k−1}` with `P_k` the ratio of consecutive coefficients.
    pub fn y_coordinates(&self) -> Vec<Complex64> {
        let n = self.degree();
        let q = |k: usize| self.coeffs[n - 1 - k];
        let mut p_prev = ONE;
        (1..n)
            .map(|k| {
                let p = q(k) / q(k - 1);
                let y = p / p_prev;
                p_prev = p;
                y
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub roots: Vec<Complex64>,
    pub min_separation: f64,
    /// largest `|W(r)|` over the roots
    pub max_residual: f64,
    /// set when two roots are closer than `1e−9·max(1, |r|)`
    pub near_multiple: bool,
}

/// All roots: eigenvalues of the companion matrix, then Newton polishing.
pub fn roots(p: &PolyW) -> Result<RootSet> {
    let n = p.degree();
    if n == 0 || p.coeffs[n] != ONE {
        return Err(Error::Domain("polynomial must be monic of positive degree".into()));
    }
    if p.coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::NonFinite("polynomial coefficient".into()));
    }
    let comp = CMatrix::from_fn(n, n, |i, j| {
        if j == n - 1 {
            -p.coeffs[i]
        } else if i == j + 1 {
            ONE
        } else {
            ZERO
        }
    });
    let mut rs: Vec<Complex64> = match Schur::try_new(balance(comp), f64::EPSILON, 10_000) {
        Some(schur) => {
            let (_, t) = schur.unpack();
            (0..n).map(|i| t[(i, i)]).collect()
        }
        // the unshifted QR sweep can stall on very symmetric companions
        None => aberth(p)?,
    };
    for r in rs.iter_mut() {
        *r = polish(p, *r);
    }
    let mut min_sep = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            min_sep = min_sep.min((rs[i] - rs[j]).norm());
        }
    }
    let max_residual = rs.iter().map(|&r| p.eval(r).norm()).fold(0.0, f64::max);
    let big = rs.iter().map(|r| r.norm()).fold(1.0, f64::max);
    if rs.iter().any(|r| !r.re.is_finite() || !r.im.is_finite()) {
        return Err(Error::NonFinite("root".into()));
    }
    Ok(RootSet {
        roots: rs,
        min_separation: min_sep,
        max_residual,
        near_multiple: min_sep < 1e-9 * big,
    })
}

/// Parlett–Reinsch balancing by powers of two; leaves the spectrum intact
/// and evens out row and column norms so that tiny roots keep their
/// relative accuracy.
fn balance(mut a: CMatrix) -> CMatrix {
    const RADIX: f64 = 2.0;
    let n = a.nrows();
    loop {
        let mut done = true;
        for i in 0..n {
            let (mut c, mut r) = (0.0, 0.0);
            for j in (0..n).filter(|&j| j != i) {
                c += a[(j, i)].l1_norm();
                r += a[(i, j)].l1_norm();
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            while c < r / RADIX {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            while c >= r * RADIX {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    a[(i, j)] /= f;
                    a[(j, i)] *= f;
                }
            }
        }
        if done {
            return a;
        }
    }
}

/// Aberth–Ehrlich simultaneous iteration from points on a circle.
fn aberth(p: &PolyW) -> Result<Vec<Complex64>> {
    let n = p.degree();
    let radius = 1.0 + p.coeffs[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(0.5 * radius, 0.4 + 2.0 * PI * k as f64 / n as f64))
        .collect();
    for _ in 0..2000 {
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let (v, dv) = p.eval_with_derivative(z[i]);
            if v == ZERO {
                continue;
            }
            let ratio = v / dv;
            let s: Complex64 = (0..n).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let w = ratio / (ONE - ratio * s);
            z[i] -= w;
            worst = worst.max(w.norm() / z[i].norm().max(1e-300));
        }
        if worst < 1e-15 {
            return Ok(z);
        }
    }
    Err(Error::NonFinite("root iteration did not converge".into()))
}

fn polish(p: &PolyW, mut r: Complex64) -> Complex64 {
    let (mut v, _) = p.eval_with_derivative(r);
    for _ in 0..8 {
        let (_, dp) = p.eval_with_derivative(r);
        if dp == ZERO {
            break;
        }
        let cand = r - v / dp;
        let vc = p.eval(cand);
        if vc.norm() >= v.norm() {
            break;
        }
        r = cand;
        v = vc;
        if v == ZERO {
            break;
        }
    }
    r
}

fn check_basin(v: &[Complex64], radius: f64, what: &str) -> Result<()> {
    if let Some(m) = v.iter().map(|c| c.norm()).reduce(f64::max) {
        if m > radius {
            return Err(Error::Basin(format!(
                "|{what}| = {m} exceeds labeling radius {radius}"
            )));
        }
    }
    Ok(())
}

/// Assigns each target the nearest root; fails unless the assignment is a
/// bijection.
fn label_by_targets(rs: &[Complex64], targets: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut used = vec![false; rs.len()];
    let mut out = Vec::with_capacity(targets.len());
    for (i, t) in targets.iter().enumerate() {
        let (j, _) = rs
            .iter()
            .enumerate()
            .map(|(j, r)| (j, (r - t).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        if used[j] {
            return Err(Error::Labeling(format!(
                "two labels claim the root nearest target {i}"
            )));
        }
        used[j] = true;
        out.push(rs[j]);
    }
    Ok(out)
}

/// `κ_0, …, κ_{n−1}` with `κ_i → ζ^{2i+1}` as `x → 0`.
pub fn label_roots_x(x: &[Complex64], radius: f64) -> Result<Vec<Complex64>> {
    check_basin(x, radius, "x")?;
    let n = x.len() + 1;
    let rs = roots(&PolyW::x_side(x))?;
    let targets: Vec<_> = (0..n).map(|i| zeta(n).powu(2 * i as u32 + 1)).collect();
    label_by_targets(&rs.roots, &targets)
}

/// `μ_0 → −1` and `μ_k ∼ −y₁⋯y_k`. Roots are ranked by modulus and each
/// must lie within half its target's modulus of the target.
pub fn label_roots_y(y: &[Complex64], radius: f64) -> Result<Vec<Complex64>> {
    check_basin(y, radius, "y")?;
    let n = y.len() + 1;
    let mut rs = roots(&PolyW::y_side(y))?.roots;
    rs.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    let mut p = -ONE;
    for (k, r) in rs.iter().enumerate() {
        if k > 0 {
            p *= y[k - 1];
        }
        if (r - p).norm() > 0.5 * p.norm() + 1e-300 {
            return Err(Error::Labeling(format!(
                "root {r} is not close to its target {p} for label {k}"
            )));
        }
    }
    debug_assert_eq!(rs.len(), n);
    Ok(rs)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelingReport {
    pub n: usize,
    /// `max |κ_i(0) − ζ^{2i+1}|`
    pub x_defect: f64,
    pub y_modulus: f64,
    /// `max |μ_k − (−y₁⋯y_k)| / |y₁⋯y_k|` at `|y_i| = y_modulus`
    pub y_relative: f64,
}

/// Labels at `x = 0`, and at a `y` with `|y_i| = t` and spread phases.
pub fn labeling_report(n: usize, t: f64) -> Result<LabelingReport> {
    let k = label_roots_x(&vec![ZERO; n - 1], 0.1)?;
    let x_defect = k
        .iter()
        .enumerate()
        .map(|(i, r)| (r - zeta(n).powu(2 * i as u32 + 1)).norm())
        .fold(0.0, f64::max);
    let y: Vec<Complex64> = (0..n - 1)
        .map(|i| Complex64::from_polar(t, 0.3 * (i + 1) as f64))
        .collect();
    let mu = label_roots_y(&y, 0.1)?;
    let mut p = -ONE;
    let mut y_relative: f64 = 0.0;
    for (k, m) in mu.iter().enumerate() {
        if k > 0 {
            p *= y[k - 1];
        }
        y_relative = y_relative.max((m - p).norm() / p.norm());
    }
    Ok(LabelingReport {
        n,
        x_defect,
        y_modulus: t,
        y_relative,
    })
}

/// `ρ = exp(2π√−1/(n+1))`.
pub fn rho(n: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI / (n + 1) as f64)
}

/// Roots `μ_0, …, μ_{n−1}` on the first leg at parameter `ε`.
///
/// `μ_1, …, μ_{n−1}` are turned by the common angle `δ sin(πε)` and `μ_0`
/// keeps the root sum at `−1`. With `δ = 0` and `n = 5`, `μ_0` passes
/// through 0 (where `ε² + ε³ = 1`), which is the divisor `y_4 = 0`.
pub fn leg1_roots(n: usize, eps: f64, delta: f64) -> Vec<Complex64> {
    let r = rho(n);
    let turn = Complex64::from_polar(1.0, delta * (PI * eps).sin());
    let tail: Vec<Complex64> = (1..n)
        .map(|k| turn * r.powu(k as u32 + 1) * eps.powi(k as i32))
        .collect();
    let mut out = vec![-ONE - tail.iter().sum::<Complex64>()];
    out.extend(tail);
    out
}

/// Roots `κ_0, …, κ_{n−1}` on the second leg at parameter `ε′`.
///
/// With `eta = 0` the roots stay on the unit circle and all of them meet at
/// `κ = −1` when `ε′ = n/(2n+1)`, so that path crosses the discriminant.
/// For `eta > 0` root `k` is pushed to modulus
/// `exp(η sin(πε′)(k − (n−1)/2))`: the moduli are distinct inside the leg,
/// their product stays 1, and the endpoints are unchanged.
pub fn leg2_roots(n: usize, eps: f64, eta: f64) -> Vec<Complex64> {
    let nf = n as f64;
    let bump = eta * (PI * eps).sin();
    (0..n)
        .map(|k| {
            let kf = k as f64;
            let t = (2.0 * kf + 1.0) / nf * eps + 2.0 * (nf - kf) / (nf + 1.0) * (1.0 - eps);
            Complex64::from_polar((bump * (kf - (nf - 1.0) / 2.0)).exp(), PI * t)
        })
        .collect()
}

/// `ε′ = n/(2n+1)`, where the unperturbed second leg has a root of
/// multiplicity `n` at `κ = −1`.
pub fn leg2_collision(n: usize) -> f64 {
    n as f64 / (2 * n + 1) as f64
}

fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// The concatenated path, with its endpoints placed where the chart
/// coordinates first drop below the thresholds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    pub n: usize,
    /// steps per leg before any refinement
    pub steps: usize,
    pub y_threshold: f64,
    pub x_threshold: f64,
    /// turning angle of the first-leg roots, see [`leg1_roots`]
    pub delta: f64,
    /// radial separation of the second-leg roots, see [`leg2_roots`]
    pub eta: f64,
}

/// Default radial separation on the second leg.
pub const DEFAULT_ETA: f64 = 0.05;

/// Default turning angle on the first leg.
pub const DEFAULT_DELTA: f64 = 0.05;

impl PathSpec {
    pub fn new(n: usize, steps: usize) -> Self {
        PathSpec {
            n,
            steps,
            y_threshold: 0.05,
            x_threshold: 0.05,
            delta: DEFAULT_DELTA,
            eta: DEFAULT_ETA,
        }
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn y_at(&self, eps: f64) -> Vec<Complex64> {
        PolyW::from_roots(Chart::Y, &leg1_roots(self.n, eps, self.delta)).y_coordinates()
    }

    pub fn x_at(&self, eps: f64) -> Vec<Complex64> {
        PolyW::from_roots(Chart::X, &leg2_roots(self.n, eps, self.eta)).x_coordinates()
    }

    /// Largest grid value `ε = k/steps` below the first grid point where
    /// `max|y_i|` reaches the threshold.
    pub fn eps_start(&self) -> Result<f64> {
        for k in 1..=self.steps {
            let e = k as f64 / self.steps as f64;
            if max_abs(&self.y_at(e)) >= self.y_threshold {
                if k == 1 {
                    return Err(Error::Basin("y threshold below first grid point".into()));
                }
                return Ok((k - 1) as f64 / self.steps as f64);
            }
        }
        Err(Error::Basin("y never reaches the threshold".into()))
    }

    /// Smallest grid value `ε′` above the last grid point where `max|x_i|`
    /// is at or over the threshold.
    pub fn eps_end(&self) -> Result<f64> {
        for k in (0..self.steps).rev() {
            let e = k as f64 / self.steps as f64;
            if max_abs(&self.x_at(e)) >= self.x_threshold {
                if k + 1 == self.steps {
                    return Err(Error::Basin("x threshold above last grid point".into()));
                }
                return Ok((k + 1) as f64 / self.steps as f64);
            }
        }
        Err(Error::Basin("x never reaches the threshold".into()))
    }

    /// Net change of `arg μ_0` over the first leg, in units of `π`, from the
    /// closed-form trajectory. Negative for `n ≤ 4`; from `n = 6` on the
    /// unturned leg sends `μ_0` once around the origin the other way.
    pub fn mu0_turn(&self) -> Result<f64> {
        let e0 = self.eps_start()?;
        let grid = 4 * self.steps.max(1000);
        let mut prev = leg1_roots(self.n, e0, self.delta)[0];
        let mut turn = 0.0;
        for k in 1..=grid {
            let e = e0 + (1.0 - e0) * k as f64 / grid as f64;
            let cur = leg1_roots(self.n, e, self.delta)[0];
            turn += (cur / prev).arg();
            prev = cur;
        }
        Ok(turn / PI)
    }

    /// The first leg turned just enough that `μ_0` runs clockwise from `−1`
    /// to `ρ` while staying at distance `0.02` from 0 and from the other
    /// roots. Returns the prescribed path unchanged when it already does.
    pub fn clockwise(n: usize, steps: usize) -> Result<Self> {
        let base = PathSpec::new(n, steps);
        let e0 = base.eps_start()?;
        for k in 1..=64 {
            let path = base.clone().with_delta(0.05 * k as f64);
            if path.mu0_turn()? >= 0.0 {
                continue;
            }
            let clear = (0..=2000).all(|j| {
                let e = e0 + (1.0 - e0) * j as f64 / 2000.0;
                let rs = leg1_roots(n, e, path.delta);
                rs[0].norm() > 0.02 && rs[1..].iter().all(|r| (r - rs[0]).norm() > 0.02)
            });
            if clear {
                return Ok(path);
            }
        }
        Err(Error::Path(format!("no clockwise first leg found for n = {n}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackStep {
    pub leg: u8,
    pub param: f64,
    pub roots: Vec<Complex64>,
    /// unwrapped logarithms, continuous in the parameter
    pub logs: Vec<Complex64>,
}

/// Tracked trajectories of one leg.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LegTrack {
    pub steps: Vec<TrackStep>,
    pub min_separation: f64,
    /// largest per-step change of an unwrapped argument
    pub max_arg_jump: f64,
    /// largest `|W(r)|/max|coefficient|`
    pub max_residual: f64,
    /// extra subdivisions made by refinement
    pub refinements: usize,
}

/// Parameter-dependent family tracked by [`track_family`].
pub trait Family {
    fn poly(&self, t: f64) -> PolyW;
}

impl<F: Fn(f64) -> PolyW> Family for F {
    fn poly(&self, t: f64) -> PolyW {
        self(t)
    }
}

struct Tracker<'a> {
    family: &'a dyn Family,
    leg: u8,
    min_dt: f64,
    steps: Vec<TrackStep>,
    min_sep: f64,
    max_jump: f64,
    max_res: f64,
    refinements: usize,
    record: bool,
}

impl Tracker<'_> {
    fn solve(&mut self, t: f64) -> Result<Vec<Complex64>> {
        let p = self.family.poly(t);
        let rs = roots(&p)?;
        self.min_sep = self.min_sep.min(rs.min_separation);
        self.max_res = self.max_res.max(rs.max_residual / p.scale());
        Ok(rs.roots)
    }

    /// Matches `new` to `prev` by nearest neighbour; every move must stay
    /// below half the smallest separation among the new roots.
    /// Each previous root takes its nearest new root, which must lie within
    /// half the distance from that previous root to its nearest neighbour.
    fn matched(prev: &[Complex64], new: &[Complex64]) -> Option<Vec<Complex64>> {
        let n = prev.len();
        let mut used = vec![false; n];
        let mut out = Vec::with_capacity(n);
        for (i, p) in prev.iter().enumerate() {
            let room = (0..n)
                .filter(|&j| j != i)
                .map(|j| (prev[j] - p).norm())
                .fold(f64::INFINITY, f64::min);
            let (j, d) = new
                .iter()
                .enumerate()
                .map(|(j, r)| (j, (r - p).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))?;
            if used[j] || d >= 0.5 * room {
                return None;
            }
            used[j] = true;
            out.push(new[j]);
        }
        Some(out)
    }

    fn advance(
        &mut self,
        t0: f64,
        prev: &[Complex64],
        logs: &mut [Complex64],
        t1: f64,
    ) -> Result<Vec<Complex64>> {
        let fresh = self.solve(t1)?;
        if let Some(m) = Self::matched(prev, &fresh) {
            for ((l, old), new) in logs.iter_mut().zip(prev).zip(&m) {
                let d = (new / old).ln();
                self.max_jump = self.max_jump.max(d.im.abs());
                *l += d;
            }
            if self.record {
                self.steps.push(TrackStep {
                    leg: self.leg,
                    param: t1,
                    roots: m.clone(),
                    logs: logs.to_vec(),
                });
            }
            return Ok(m);
        }
        let half = 0.5 * (t1 - t0);
        if half.abs() < self.min_dt {
            return Err(Error::Matching(format!(
                "root matching failed near t = {t1} after {} refinements",
                self.refinements
            )));
        }
        self.refinements += 1;
        let mid = t0 + half;
        let at_mid = self.advance(t0, prev, logs, mid)?;
        self.advance(mid, &at_mid, logs, t1)
    }
}

/// Tracks the roots of `family(t)` from `t0` to `t1` in `steps` uniform
/// steps (refined on demand), starting from the labeled `start` roots with
/// logarithms `start_logs`.
#[allow(clippy::too_many_arguments)]
pub fn track_family(
    family: &dyn Family,
    leg: u8,
    t0: f64,
    t1: f64,
    steps: usize,
    start: &[Complex64],
    start_logs: &[Complex64],
    record: bool,
) -> Result<LegTrack> {
    if steps == 0 {
        return Err(Error::Domain("steps must be positive".into()));
    }
    let mut tr = Tracker {
        family,
        leg,
        min_dt: (t1 - t0).abs() / MAX_STEPS as f64,
        steps: Vec::new(),
        min_sep: f64::INFINITY,
        max_jump: 0.0,
        max_res: 0.0,
        refinements: 0,
        record,
    };
    let mut logs = start_logs.to_vec();
    // the first step is kept even when intermediate ones are not
    tr.steps.push(TrackStep {
        leg,
        param: t0,
        roots: start.to_vec(),
        logs: logs.clone(),
    });
    let mut cur = start.to_vec();
    for k in 1..=steps {
        let ta = t0 + (t1 - t0) * (k - 1) as f64 / steps as f64;
        let tb = t0 + (t1 - t0) * k as f64 / steps as f64;
        cur = tr.advance(ta, &cur, &mut logs, tb)?;
    }
    if !record {
        tr.steps.push(TrackStep {
            leg,
            param: t1,
            roots: cur,
            logs,
        });
    }
    Ok(LegTrack {
        steps: tr.steps,
        min_separation: tr.min_sep,
        max_arg_jump: tr.max_jump,
        max_residual: tr.max_res,
        refinements: tr.refinements,
    })
}

impl LegTrack {
    pub fn last(&self) -> &TrackStep {
        self.steps.last().expect("track has at least one step")
    }
}

/// Both legs plus the hand-off between them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootTrack {
    pub path: PathSpec,
    pub eps_start: f64,
    pub eps_end: f64,
    pub y_start: Vec<Complex64>,
    pub x_end: Vec<Complex64>,
    pub leg1: LegTrack,
    pub leg2: LegTrack,
    /// `sigma[i]`: label at the orbifold end of the root that `μ_i` became
    pub sigma: Vec<usize>,
    /// `max |μ_i − 1/(x₁κ_{σ(i)})|` at the junction
    pub junction_mismatch: f64,
    /// largest distance between solved and closed-form roots at the
    /// recorded steps
    pub closed_form_deviation: f64,
}

impl RootTrack {
    pub fn sigma_is_identity(&self) -> bool {
        self.sigma.iter().enumerate().all(|(i, &s)| i == s)
    }

    pub fn min_separation(&self) -> f64 {
        self.leg1.min_separation.min(self.leg2.min_separation)
    }
}

/// Smallest root separation accepted anywhere on a tracked path.
pub const SEPARATION_FLOOR: f64 = 1e-12;

/// Tracks the prescribed path from the `Y` end (`ε = ε_start`) through the
/// junction `x = y = (1,…,1)` to the `𝒳` end (`ε′ = ε′_end`).
pub fn track(path: &PathSpec, record: bool) -> Result<RootTrack> {
    let n = path.n;
    if n < 2 {
        return Err(Error::Domain(format!("rank n = {n}, need n ≥ 2")));
    }
    let e0 = path.eps_start()?;
    let e1 = path.eps_end()?;
    // the closed-form trajectories must stay apart on the whole grid
    for k in 0..=path.steps {
        let e = k as f64 / path.steps as f64;
        let mut sep = f64::INFINITY;
        for rs in [leg1_roots(n, e.max(e0), path.delta), leg2_roots(n, e.min(e1), path.eta)] {
            for i in 0..n {
                for j in i + 1..n {
                    sep = sep.min((rs[i] - rs[j]).norm());
                }
            }
        }
        if sep < SEPARATION_FLOOR {
            return Err(Error::Path(format!(
                "roots meet at grid parameter {e} (separation {sep:e}); the unperturbed \
                 second leg has a root of multiplicity n at ε′ = {}",
                leg2_collision(n)
            )));
        }
    }
    let y_start = path.y_at(e0);
    let x_end = path.x_at(e1);

    // leg 1: labeled μ at the Y end, principal logarithms
    let mu0 = label_roots_y(&y_start, 0.1)?;
    let logs0: Vec<_> = mu0.iter().map(|m| m.ln()).collect();
    let delta = path.delta;
    let fam1 = move |e: f64| PolyW::y_side(&PolyW::from_roots(Chart::Y, &leg1_roots(n, e, delta)).y_coordinates());
    let steps1 = ((1.0 - e0) * path.steps as f64).round().max(1.0) as usize;
    let leg1 = track_family(&fam1, 1, e0, 1.0, steps1, &mu0, &logs0, record)?;

    // junction: μ = 1/(x₁κ) with x = (1, …, 1)
    let mu_j = leg1.last().roots.clone();
    let x_j = path.x_at(0.0);
    let kappa_j = roots(&PolyW::x_side(&x_j))?.roots;
    let images: Vec<Complex64> = kappa_j.iter().map(|k| (x_j[0] * k).inv()).collect();
    let matched = Tracker::matched(&mu_j, &images)
        .ok_or_else(|| Error::Matching("junction hand-off is ambiguous".into()))?;
    let junction_mismatch = mu_j
        .iter()
        .zip(&matched)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let kappa_start: Vec<Complex64> = matched.iter().map(|m| (x_j[0] * m).inv()).collect();
    // log κ continues −log μ − log x₁ across the junction
    let log_x1 = x_j[0].ln();
    let klogs: Vec<Complex64> = leg1.last().logs.iter().map(|l| -l - log_x1).collect();

    let eta = path.eta;
    let fam2 = move |e: f64| PolyW::x_side(&PolyW::from_roots(Chart::X, &leg2_roots(n, e, eta)).x_coordinates());
    let steps2 = (e1 * path.steps as f64).round().max(1.0) as usize;
    let leg2 = track_family(&fam2, 2, 0.0, e1, steps2, &kappa_start, &klogs, record)?;

    let end_labeled = label_roots_x(&x_end, 0.1)?;
    let sigma = leg2
        .last()
        .roots
        .iter()
        .map(|r| {
            end_labeled
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - r).norm().total_cmp(&(b.1 - r).norm()))
                .map(|(j, _)| j)
                .expect("nonempty")
        })
        .collect();

    let mut dev: f64 = 0.0;
    for s in &leg1.steps {
        let cf = leg1_roots(n, s.param, path.delta);
        dev = dev.max(set_distance(&s.roots, &cf));
    }
    for s in &leg2.steps {
        let cf = leg2_roots(n, s.param, path.eta);
        dev = dev.max(set_distance(&s.roots, &cf));
    }
    let out = RootTrack {
        path: path.clone(),
        eps_start: e0,
        eps_end: e1,
        y_start,
        x_end,
        leg1,
        leg2,
        sigma,
        junction_mismatch,
        closed_form_deviation: dev,
    };
    if out.min_separation() < SEPARATION_FLOOR {
        return Err(Error::Path(format!(
            "root separation {} fell below {SEPARATION_FLOOR}",
            out.min_separation()
        )));
    }
    Ok(out)
}

/// Largest distance from a root in `a` to the nearest element of `b`.
fn set_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .map(|r| b.iter().map(|s| (r - s).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

/// Estimate of the part of a series beyond its cap at a point, from the
/// sizes of its last homogeneous pieces.
pub fn tail_estimate(f: &TruncatedSeries, point: &[Complex64]) -> f64 {
    let d = f.degree_cap();
    let piece = |k: usize| -> f64 {
        if k > d {
            0.0
        } else {
            f.homogeneous_part(k).eval(point).norm()
        }
    };
    if d < 3 {
        return piece(d) + if d >= 1 { piece(d - 1) } else { 0.0 };
    }
    let last = piece(d) + piece(d - 1);
    let before = piece(d - 2) + piece(d - 3);
    if before == 0.0 {
        return last;
    }
    let r = (last / before).sqrt();
    if r < 1.0 {
        last * r / (1.0 - r)
    } else {
        last
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootToF {
    pub n: usize,
    pub x: Vec<Complex64>,
    pub degree: usize,
    /// `log κ_i` continued from `x = 0` along the segment `t·x`
    pub tracked: Vec<Complex64>,
    /// `(2i+1)π√−1/n + (1/n)Σ_k ζ^{(2i+1)k} f_k(x)`
    pub predicted: Vec<Complex64>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    /// `|Σ_i log κ_i − πi·n|`; the product of the roots is `(−1)^n`
    pub log_sum_defect: f64,
}

fn roottof_rhs(n: usize, fx: &[Complex64]) -> Vec<Complex64> {
    let z = zeta(n);
    (0..n)
        .map(|i| {
            let base = Complex64::new(0.0, (2 * i + 1) as f64 * PI / n as f64);
            let s: Complex64 = (1..n)
                .map(|k| z.powu(((2 * i + 1) * k) as u32) * fx[k - 1])
                .sum();
            base + s / n as f64
        })
        .collect()
}

/// Checks `log κ_i(x)` against the flat coordinates at a point near `x = 0`.
pub fn verify_roottof(n: usize, x: &[Complex64], degree: usize) -> Result<RootToF> {
    if x.len() + 1 != n {
        return Err(Error::Shape(format!("point of length {} at rank {n}", x.len())));
    }
    check_basin(x, 0.1, "x")?;
    let start: Vec<Complex64> = (0..n).map(|i| zeta(n).powu(2 * i as u32 + 1)).collect();
    let logs: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(0.0, (2 * i + 1) as f64 * PI / n as f64))
        .collect();
    let xs = x.to_vec();
    let fam = move |t: f64| PolyW::x_side(&xs.iter().map(|v| v * t).collect::<Vec<_>>());
    let leg = track_family(&fam, 0, 0.0, 1.0, 64, &start, &logs, false)?;
    let tracked = leg.last().logs.clone();
    let fs = flat_coords_x(n, degree)?;
    let fx: Vec<Complex64> = fs.iter().map(|f| f.eval(x)).collect();
    let predicted = roottof_rhs(n, &fx);
    let residuals: Vec<f64> = tracked
        .iter()
        .zip(&predicted)
        .map(|(a, b)| (a - b).norm())
        .collect();
    let sum: Complex64 = tracked.iter().sum();
    Ok(RootToF {
        n,
        x: x.to_vec(),
        degree,
        max_residual: residuals.iter().cloned().fold(0.0, f64::max),
        residuals,
        tracked,
        predicted,
        log_sum_defect: (sum - Complex64::new(0.0, PI * n as f64)).norm(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    /// tail of the `S_k` at the `Y` end
    pub series_tail_y: f64,
    /// tail of the `f_k` at the `𝒳` end, weighted by `Σ_k |L_{ik}|`
    pub series_tail_x: f64,
    /// root residuals and hand-off mismatch along the path
    pub tracking: f64,
}

impl ErrorBudget {
    pub fn total(&self) -> f64 {
        self.series_tail_y + self.series_tail_x + self.tracking
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProAcReport {
    pub n: usize,
    pub degree: usize,
    pub steps: usize,
    pub sigma: Vec<usize>,
    pub eps_start: f64,
    pub eps_end: f64,
    pub y_start: Vec<Complex64>,
    pub x_end: Vec<Complex64>,
    /// `g_i` at the `Y` end, `1 ≤ i < n`
    pub g_start: Vec<Complex64>,
    /// `g_i` continued to the `𝒳` end
    pub continued: Vec<Complex64>,
    /// `−2π√−1/n + Σ_j L_{ij} f_j(x)`
    pub predicted: Vec<Complex64>,
    pub errors: Vec<f64>,
    pub max_error: f64,
    /// `(continued − Σ_j L_{ij} f_j)·n/(2π√−1)`, expected to be `−1`
    pub offsets: Vec<Complex64>,
    pub error_budget: ErrorBudget,
    pub min_separation: f64,
    pub max_arg_jump: f64,
    pub junction_mismatch: f64,
    pub refinements: usize,
    /// first-leg turning angle of the path used
    pub delta: f64,
    /// tracked net change of `arg μ_0` over the first leg, in units of `π`
    pub mu0_turn: f64,
}

/// Continues `g_i = log y_i + S_i(y)` along the prescribed path and compares
/// it with the affine combination of flat coordinates at the far end.
pub fn verify_prop_ac(n: usize, degree: usize, steps: usize) -> Result<ProAcReport> {
    verify_prop_ac_along(&PathSpec::new(n, steps), degree)
}

/// [`verify_prop_ac`] along an arbitrary two-leg path.
pub fn verify_prop_ac_along(path: &PathSpec, degree: usize) -> Result<ProAcReport> {
    let (n, steps) = (path.n, path.steps);
    let tr = track(path, false)?;
    if !tr.sigma_is_identity() {
        return Err(Error::Path(format!("permutation {:?} is not the identity", tr.sigma)));
    }
    let s = s_series(n, degree)?;
    let y = &tr.y_start;
    let g_start: Vec<Complex64> = (1..n)
        .map(|i| y[i - 1].ln() + s[i - 1].eval(y))
        .collect();
    let l1 = &tr.leg1.last().logs;
    let l1_0: Vec<Complex64> = label_roots_y(y, 0.1)?.iter().map(|m| m.ln()).collect();
    let k_start = &tr.leg2.steps[0].logs;
    let k_end = &tr.leg2.last().logs;
    let continued: Vec<Complex64> = (1..n)
        .map(|i| {
            let d1 = (l1[i] - l1_0[i]) - (l1[i - 1] - l1_0[i - 1]);
            let d2 = (k_end[i] - k_start[i]) - (k_end[i - 1] - k_start[i - 1]);
            g_start[i - 1] + d1 - d2
        })
        .collect();
    let fs = flat_coords_x(n, degree)?;
    let x = &tr.x_end;
    let fx: Vec<Complex64> = fs.iter().map(|f| f.eval(x)).collect();
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let lin: Vec<Complex64> = (1..n)
        .map(|i| (1..n).map(|j| l_entry(n, i, j) * fx[j - 1]).sum())
        .collect();
    let predicted: Vec<Complex64> = lin.iter().map(|v| v - two_pi_i / n as f64).collect();
    let errors: Vec<f64> = continued
        .iter()
        .zip(&predicted)
        .map(|(a, b)| (a - b).norm())
        .collect();
    let offsets = continued
        .iter()
        .zip(&lin)
        .map(|(c, l)| (c - l) * n as f64 / two_pi_i)
        .collect();
    let tail_y = s.iter().map(|f| tail_estimate(f, y)).fold(0.0, f64::max);
    let lrow: f64 = (1..n)
        .map(|i| (1..n).map(|j| l_entry(n, i, j).norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let tail_x = lrow * fs.iter().map(|f| tail_estimate(f, x)).fold(0.0, f64::max);
    let root_scale = 1.0 / tr.min_separation().max(1e-300);
    let tracking = 4.0
        * (tr.leg1.max_residual.max(tr.leg2.max_residual) * root_scale + tr.junction_mismatch);
    Ok(ProAcReport {
        n,
        degree,
        steps,
        sigma: tr.sigma.clone(),
        eps_start: tr.eps_start,
        eps_end: tr.eps_end,
        y_start: tr.y_start.clone(),
        x_end: tr.x_end.clone(),
        g_start,
        continued,
        predicted,
        max_error: errors.iter().cloned().fold(0.0, f64::max),
        errors,
        offsets,
        error_budget: ErrorBudget {
            series_tail_y: tail_y,
            series_tail_x: tail_x,
            tracking,
        },
        min_separation: tr.min_separation(),
        max_arg_jump: tr.leg1.max_arg_jump.max(tr.leg2.max_arg_jump),
        junction_mismatch: tr.junction_mismatch,
        refinements: tr.leg1.refinements + tr.leg2.refinements,
        delta: path.delta,
        mu0_turn: (l1[0] - l1_0[0]).im / PI,
    })
}

/// Largest relative mismatch between `{1/(x₁κ_i)}` and `{μ_i(y(x))}`,
/// matched greedily.
pub fn root_correspondence(x: &[Complex64]) -> Result<f64> {
    let y = change_coordinates(x)?;
    let kappa = roots(&PolyW::x_side(x))?.roots;
    let mu = roots(&PolyW::y_side(&y))?.roots;
    let images: Vec<Complex64> = kappa.iter().map(|k| (x[0] * k).inv()).collect();
    let mut used = vec![false; mu.len()];
    let mut worst: f64 = 0.0;
    for a in &images {
        let (j, d) = mu
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, m)| (j, (a - m).norm() / a.norm().max(m.norm())))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("same number of roots");
        used[j] = true;
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Tracks `W_𝒳` along a closed loop `x(t)`, `t ∈ [0, 1]`, that starts and
/// ends at `x = 0`, and returns the permutation of the labels.
pub fn loop_permutation(
    n: usize,
    path: impl Fn(f64) -> Vec<Complex64> + 'static,
    steps: usize,
) -> Result<Vec<usize>> {
    let start: Vec<Complex64> = (0..n).map(|i| zeta(n).powu(2 * i as u32 + 1)).collect();
    let fam = move |t: f64| PolyW::x_side(&path(t));
    let logs = vec![ZERO; n];
    let leg = track_family(&fam, 0, 0.0, 1.0, steps, &start, &logs, false)?;
    Ok(leg
        .last()
        .roots
        .iter()
        .map(|r| {
            start
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - r).norm().total_cmp(&(b.1 - r).norm()))
                .map(|(j, _)| j)
                .expect("nonempty")
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn roots_at_the_orbifold_point() {
        for n in 2..9 {
            let k = label_roots_x(&vec![ZERO; n - 1], 0.1).unwrap();
            for (i, r) in k.iter().enumerate() {
                assert!((r - zeta(n).powu(2 * i as u32 + 1)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn small_polynomials() {
        let rs = roots(&PolyW::y_side(&[ZERO])).unwrap();
        let mut v: Vec<f64> = rs.roots.iter().map(|r| r.re).collect();
        v.sort_by(f64::total_cmp);
        assert!((v[0] + 1.0).abs() < 1e-15 && v[1].abs() < 1e-15);
        let rs = roots(&PolyW::x_side(&[ONE])).unwrap();
        for r in rs.roots {
            assert!((r.norm() - 1.0).abs() < 1e-14);
            assert!((r.arg().abs() - 2.0 * PI / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn y_labels_follow_asymptotics() {
        let t = 1e-3;
        let mu = label_roots_y(&[c(t, 0.0), c(t, 0.0)], 0.1).unwrap();
        assert!((mu[0] + 1.0).norm() < 1e-2);
        assert!((mu[1] + t).norm() < 1e-2 * t);
        assert!((mu[2] + t * t).norm() < 1e-2 * t * t);
        assert!(matches!(label_roots_y(&[c(0.5, 0.0)], 0.1), Err(Error::Basin(_))));
    }

    #[test]
    fn coefficients_from_roots_round_trip() {
        let y = vec![c(0.02, 0.01), c(-0.03, 0.0), c(0.01, -0.04)];
        let p = PolyW::y_side(&y);
        let back = PolyW::from_roots(Chart::Y, &roots(&p).unwrap().roots).y_coordinates();
        for (a, b) in y.iter().zip(&back) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn legs_meet_at_the_junction() {
        for n in 2..8 {
            let path = PathSpec::new(n, 100);
            for v in path.y_at(1.0).iter().chain(path.x_at(0.0).iter()) {
                assert!((v - ONE).norm() < 1e-12, "n={n}");
            }
            let mu = leg1_roots(n, 1.0, DEFAULT_DELTA);
            let kappa = leg2_roots(n, 0.0, DEFAULT_ETA);
            for (m, k) in mu.iter().zip(&kappa) {
                assert!((m - k.inv()).norm() < 1e-12);
            }
            // x = 0 at the end of leg 2
            assert!(max_abs(&path.x_at(1.0)) < 1e-12);
        }
    }

    #[test]
    fn prescribed_path_has_identity_permutation() {
        for n in 2..6 {
            let tr = track(&PathSpec::new(n, 400), false).unwrap();
            assert!(tr.sigma_is_identity(), "n={n}: {:?}", tr.sigma);
            assert!(tr.junction_mismatch < 1e-10);
            assert!(tr.leg1.max_arg_jump < PI / 2.0, "n={n}: {} {}", tr.leg1.max_arg_jump, tr.eps_start);
        }
    }

    #[test]
    fn unperturbed_second_leg_hits_the_discriminant() {
        for n in 2..7 {
            let rs = leg2_roots(n, leg2_collision(n), 0.0);
            for r in &rs {
                assert!((r + ONE).norm() < 1e-12);
            }
        }
        let err = track(&PathSpec::new(2, 2000).with_eta(0.0), false).unwrap_err();
        assert!(matches!(err, Error::Path(_)), "{err:?}");
    }

    #[test]
    fn detour_loop_swaps_roots() {
        let two = Complex64::from(2.0);
        let sigma = loop_permutation(
            2,
            move |t| vec![two - two * Complex64::from_polar(1.0, 2.0 * PI * t)],
            400,
        )
        .unwrap();
        assert_eq!(sigma, vec![1, 0]);
        // a loop that does not enclose the discriminant changes nothing
        let small = loop_permutation(
            2,
            |t| vec![Complex64::from(0.5) - Complex64::from_polar(0.5, 2.0 * PI * t)],
            400,
        )
        .unwrap();
        assert_eq!(small, vec![0, 1]);
    }

    #[test]
    fn roottof_small_cases() {
        let r = verify_roottof(2, &[ZERO], 8).unwrap();
        assert!(r.max_residual < 1e-14);
        let r = verify_roottof(2, &[c(0.05, 0.0)], 12).unwrap();
        assert!(r.max_residual < 1e-12, "{}", r.max_residual);
        assert!(r.log_sum_defect < 1e-12);
        let r = verify_roottof(4, &[c(0.03, 0.01), c(-0.02, 0.0), c(0.0, 0.04)], 12).unwrap();
        assert!(r.max_residual < 1e-10, "{}", r.max_residual);
    }

    #[test]
    fn correspondence_at_a_point() {
        let x = vec![c(0.7, -0.2), c(1.3, 0.4), c(-0.6, 0.9)];
        assert!(root_correspondence(&x).unwrap() < 1e-12);
    }

    #[test]
    fn mu0_winding_changes_class_at_n6() {
        for n in 2..5 {
            assert!(PathSpec::new(n, 2000).mu0_turn().unwrap() < 0.0);
        }
        // the turned leg chooses the clockwise side of μ_0 = 0 at n = 5
        assert!(PathSpec::new(5, 2000).mu0_turn().unwrap() < 0.0);
        assert!(PathSpec::new(5, 2000).with_delta(-0.05).mu0_turn().unwrap() > 0.0);
        assert!(PathSpec::new(6, 2000).mu0_turn().unwrap() > 0.0);
        let fixed = PathSpec::clockwise(6, 2000).unwrap();
        assert!(fixed.delta > DEFAULT_DELTA);
        assert!(fixed.mu0_turn().unwrap() < 0.0);
    }

    #[test]
    fn prescribed_path_at_n6_picks_up_a_full_turn() {
        let r = verify_prop_ac(6, 12, 2000).unwrap();
        assert!((r.offsets[0] + 7.0).norm() < 1e-6, "{:?}", r.offsets);
        for o in &r.offsets[1..] {
            assert!((o + 1.0).norm() < 1e-6);
        }
        let r = verify_prop_ac_along(&PathSpec::clockwise(6, 2000).unwrap(), 12).unwrap();
        assert!(r.max_error < 1e-5, "{r:?}");
    }

    #[test]
    fn prop_ac_n2() {
        let r = verify_prop_ac(2, 12, 2000).unwrap();
        assert!(r.max_error < 1e-6, "{r:?}");
        assert!((r.offsets[0] + 1.0).norm() < 1e-5);
    }
}
