use nalgebra::{DMatrix, DVector};

use super::ols::solve_least_squares;
use super::{check_response, DesignMatrix, RegressionFit};
use crate::error::{Error, Result};

/// Ridge regression: minimises `‖y − Xβ‖² + λ‖β‖²` with the intercept unpenalised.
///
/// Solved as least squares on the augmented system `[X; √λ D]`, `[y; 0]`, so
/// `λ = 0` reduces exactly to [`super::ols_fit`].
pub fn ridge_fit(x: &DesignMatrix, y: &[f64], lambda: f64) -> Result<RegressionFit> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidInput(format!("ridge penalty must be ≥ 0, got {lambda}")));
    }
    let yv = check_response(x, y)?;
    let (n, p) = (x.rows(), x.cols());
    let beta = if lambda == 0.0 {
        solve_least_squares(x.values(), &yv)?
    } else {
        let root = lambda.sqrt();
        let penalized: Vec<usize> = x.predictor_indices().collect();
        let m = penalized.len();
        let mut aug = DMatrix::zeros(n + m, p);
        aug.rows_mut(0, n).copy_from(x.values());
        for (r, &j) in penalized.iter().enumerate() {
            aug[(n + r, j)] = root;
        }
        let mut rhs = DVector::zeros(n + m);
        rhs.rows_mut(0, n).copy_from(&yv);
        solve_least_squares(&aug, &rhs)?
    };
    Ok(RegressionFit::from_parts(x, x.predictor_indices().collect(), &beta, &yv))
}
