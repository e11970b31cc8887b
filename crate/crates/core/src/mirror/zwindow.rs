use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::series::TruncatedSeries;

/// A finite window of a Laurent series in `z` whose coefficients are
/// truncated power series. Rows cover `z^top` down to `z^low`, and every
/// stored row is exact.
#[derive(Clone, Debug, PartialEq)]
pub struct ZWindow {
    top: i32,
    rows: Vec<TruncatedSeries>,
}

impl ZWindow {
    /// `rows[r]` is the coefficient of `z^(top − r)`.
    pub fn new(top: i32, rows: Vec<TruncatedSeries>) -> Self {
        assert!(!rows.is_empty(), "empty z-window");
        ZWindow { top, rows }
    }

    pub fn top(&self) -> i32 {
        self.top
    }

    pub fn low(&self) -> i32 {
        self.top - self.rows.len() as i32 + 1
    }

    pub fn rows(&self) -> &[TruncatedSeries] {
        &self.rows
    }

    pub fn get(&self, p: i32) -> Option<&TruncatedSeries> {
        if p > self.top || p < self.low() {
            return None;
        }
        self.rows.get((self.top - p) as usize)
    }

    fn zero_like(&self) -> TruncatedSeries {
        TruncatedSeries::zero(self.rows[0].nvars(), self.rows[0].degree_cap())
    }

    /// Applies `a + z(θ_w − m)`, where `θ_w = Σ w_i x_i ∂/∂x_i`. The top
    /// power rises by one and the lowest row is lost, since it would need the
    /// unknown row below the window.
    pub fn apply_factor(&self, a: Complex64, weights: &[f64], m: f64) -> Result<Self> {
        if self.rows.len() < 2 {
            return Err(Error::Window("z-window exhausted by operator order".into()));
        }
        let top = self.top + 1;
        let low = self.low() + 1;
        let zero = self.zero_like();
        let mut rows = Vec::with_capacity((top - low + 1) as usize);
        for p in (low..=top).rev() {
            let here = self.get(p).unwrap_or(&zero);
            let below = self.get(p - 1).unwrap_or(&zero);
            let mut r = below.weighted_euler(weights);
            r.add_scaled(below, Complex64::from(-m));
            r.add_scaled(here, a);
            rows.push(r);
        }
        Ok(ZWindow { top, rows })
    }

    pub fn shift(&self, exps: &[u32]) -> Self {
        ZWindow {
            top: self.top,
            rows: self.rows.iter().map(|r| r.shift(exps)).collect(),
        }
    }

    /// Difference over the common range of powers; rows present in only one
    /// operand are dropped.
    pub fn sub_common(&self, other: &Self) -> Result<Self> {
        let top = self.top.min(other.top);
        let low = self.low().max(other.low());
        if low > top {
            return Err(Error::Window("z-windows do not overlap".into()));
        }
        let rows = (low..=top)
            .rev()
            .map(|p| self.get(p).unwrap().try_sub(other.get(p).unwrap()))
            .collect::<Result<Vec<_>>>()?;
        Ok(ZWindow { top, rows })
    }

    /// Multiplies by a scalar power series in `w = 1/z`, `Σ c_k w^k`.
    pub fn mul_inverse_z(&self, c: &[Complex64]) -> Self {
        let top = self.top;
        let rows = (0..self.rows.len())
            .map(|r| {
                let mut acc = self.zero_like();
                for (k, &ck) in c.iter().enumerate().take(r + 1) {
                    if ck != Complex64::new(0.0, 0.0) {
                        acc.add_scaled(&self.rows[r - k], ck);
                    }
                }
                acc
            })
            .collect();
        ZWindow { top, rows }
    }

    pub fn max_abs(&self) -> f64 {
        self.rows.iter().map(TruncatedSeries::max_abs).fold(0.0, f64::max)
    }
}

/// `e^{c/z}` as coefficients of `w^0..w^len`.
pub fn exp_inverse_z(c: Complex64, len: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(len + 1);
    let mut term = Complex64::new(1.0, 0.0);
    out.push(term);
    for k in 1..=len {
        term = term * c / k as f64;
        out.push(term);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_window_bookkeeping() {
        let x = TruncatedSeries::variable(1, 4, 0);
        let w = ZWindow::new(1, vec![x.clone(), x.clone(), x.clone()]);
        let out = w.apply_factor(Complex64::from(2.0), &[1.0], 0.0).unwrap();
        assert_eq!(out.top(), 2);
        assert_eq!(out.low(), 0);
        // z^2 row: θ applied to the z^1 row
        assert_eq!(out.get(2).unwrap(), &x);
        // z^1 row: 2x + θx
        assert_eq!(out.get(1).unwrap().coeff(&[1]), Complex64::from(3.0));
    }

    #[test]
    fn exp_coefficients() {
        let c = exp_inverse_z(Complex64::from(2.0), 3);
        assert_eq!(c[3], Complex64::from(8.0 / 6.0));
    }
}
