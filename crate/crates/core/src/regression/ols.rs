use nalgebra::{DMatrix, DVector};

use super::{check_response, DesignMatrix, RegressionFit, RANK_TOL};
use crate::error::{Error, Result};

/// Least squares via Householder QR.
///
/// Fails with [`Error::RankDeficient`] naming every column whose component
/// orthogonal to the preceding columns is negligible.
pub fn ols_fit(x: &DesignMatrix, y: &[f64]) -> Result<RegressionFit> {
    let y = check_response(x, y)?;
    let beta = solve_least_squares(x.values(), &y)?;
    Ok(RegressionFit::from_parts(x, x.predictor_indices().collect(), &beta, &y))
}

pub(crate) fn solve_least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let (n, p) = x.shape();
    if p == 0 {
        return Ok(DVector::zeros(0));
    }
    if n < p {
        return Err(Error::RankDeficient {
            columns: (n..p).collect(),
        });
    }
    let qr = x.clone().qr();
    let r = qr.r();
    let dependent: Vec<usize> = (0..p)
        .filter(|&j| {
            let scale = x.column(j).norm();
            scale == 0.0 || r[(j, j)].abs() <= RANK_TOL * scale
        })
        .collect();
    if !dependent.is_empty() {
        return Err(Error::RankDeficient { columns: dependent });
    }
    let qty = qr.q().transpose() * y;
    r.solve_upper_triangular(&qty)
        .ok_or_else(|| Error::Numerical("triangular solve failed".into()))
}

/// Classical standard errors `sqrt(s² diag((XᵀX)⁻¹))` with `s² = rss / (n − p)`,
/// ordered like the design columns.
pub fn ols_standard_errors(x: &DesignMatrix, fit: &RegressionFit) -> Result<Vec<f64>> {
    let (n, p) = (x.rows(), x.cols());
    if n <= p {
        return Err(Error::InvalidInput(format!(
            "standard errors need n > p (n = {n}, p = {p})"
        )));
    }
    let s2 = fit.rss / (n - p) as f64;
    let xtx = x.values().transpose() * x.values();
    let inv = xtx
        .cholesky()
        .ok_or_else(|| Error::Numerical("XᵀX not positive definite".into()))?
        .inverse();
    Ok((0..p).map(|j| (s2 * inv[(j, j)]).sqrt()).collect())
}
