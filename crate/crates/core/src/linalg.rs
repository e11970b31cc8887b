//! Small dense complex linear algebra on top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub fn from_rows(rows: &[Vec<Complex64>]) -> CMatrix {
    let nr = rows.len();
    let nc = rows.first().map_or(0, Vec::len);
    CMatrix::from_fn(nr, nc, |i, j| rows[i][j])
}

/// Solves `a · x = b` by LU with full pivoting.
pub fn solve(a: &CMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
    let rhs = nalgebra::DVector::from_column_slice(b);
    let lu = a.clone().full_piv_lu();
    let x = lu
        .solve(&rhs)
        .ok_or_else(|| Error::SingularSolve(format!("{}x{} system", a.nrows(), a.ncols())))?;
    if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::SingularSolve("non-finite solution".into()));
    }
    Ok(x.iter().copied().collect())
}

pub fn inverse(a: &CMatrix) -> Result<CMatrix> {
    let inv = a
        .clone()
        .full_piv_lu()
        .try_inverse()
        .ok_or_else(|| Error::SingularSolve(format!("{}x{} inverse", a.nrows(), a.ncols())))?;
    if inv.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::SingularSolve("non-finite inverse".into()));
    }
    Ok(inv)
}

pub fn mat_vec(a: &CMatrix, v: &[Complex64]) -> Vec<Complex64> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)] * v[j]).sum())
        .collect()
}
