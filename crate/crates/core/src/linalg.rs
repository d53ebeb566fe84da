use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigenvalues (ascending) of the symmetric tridiagonal matrix with the given
/// diagonal and off-diagonal.
pub(crate) fn symmetric_tridiagonal_eigenvalues(diag: &[f64], offdiag: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    debug_assert_eq!(offdiag.len() + 1, n.max(1));
    if n == 1 {
        return Ok(vec![diag[0]]);
    }
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = diag[i];
    }
    for (i, &b) in offdiag.iter().enumerate() {
        m[(i, i + 1)] = b;
        m[(i + 1, i)] = b;
    }
    let dump = || Error::EigenSolver { diag: diag.to_vec(), offdiag: offdiag.to_vec() };
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, 1000 * n).ok_or_else(dump)?;
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(dump());
    }
    values.sort_by(f64::total_cmp);
    Ok(values)
}
