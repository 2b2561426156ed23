use super::Estimator;
use crate::error::{Error, Result};
use crate::panel::Panel;
use crate::regression::{best_subset_bic, lasso_fit, ols_fit, ridge_fit, DesignMatrix};

/// One node's selected regression on the other nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodSet {
    pub node: usize,
    pub label: String,
    /// Selected node indices, ascending; never contains `node`.
    pub neighbors: Vec<usize>,
    /// Coefficient of each neighbour, aligned with `neighbors`.
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    /// `rss / (n − k − 1)` for `k` selected neighbours.
    pub residual_variance: f64,
    pub candidates_evaluated: usize,
}

impl NeighborhoodSet {
    pub fn coefficient_of(&self, j: usize) -> f64 {
        self.neighbors
            .iter()
            .position(|&m| m == j)
            .map_or(0.0, |m| self.coefficients[m])
    }
}

/// Regresses column `i` of the window on every other column (plus intercept)
/// using `estimator`, and keeps the predictors with nonzero coefficients.
pub fn select_neighborhood(window: &Panel, i: usize, estimator: Estimator) -> Result<NeighborhoodSet> {
    let p = window.n_cols();
    let n = window.n_obs();
    if i >= p {
        return Err(Error::InvalidInput(format!("node {i} out of range for {p} columns")));
    }
    if n < p + 2 {
        return Err(Error::InvalidInput(format!(
            "window of {n} rows is too short for {p} nodes (need ≥ {})",
            p + 2
        )));
    }
    let others: Vec<usize> = (0..p).filter(|&j| j != i).collect();
    let cols: Vec<&[f64]> = others.iter().map(|&j| window.column(j)).collect();
    let x = DesignMatrix::from_columns(n, &cols, true)?;
    let y = window.column(i);

    let (fit, candidates) = match estimator {
        Estimator::BicSubset => {
            let m = best_subset_bic(&x, y)?;
            (m.fit, m.candidates_evaluated)
        }
        Estimator::Ols => (ols_fit(&x, y)?, 1),
        Estimator::Ridge { lambda } => (ridge_fit(&x, y, lambda)?, 1),
        Estimator::Lasso { lambda } => (lasso_fit(&x, y, lambda)?, 1),
    };

    // Design column c (1-based after the intercept) is node others[c - 1].
    let (neighbors, coefficients): (Vec<usize>, Vec<f64>) = fit
        .subset
        .iter()
        .zip(&fit.coefficients)
        .filter(|(_, &c)| c != 0.0)
        .map(|(&c, &coef)| (others[c - 1], coef))
        .unzip();
    let k = neighbors.len();
    let residual_variance = fit.rss / (n - k - 1) as f64;
    if !(residual_variance > 0.0) {
        return Err(Error::Numerical(format!(
            "node `{}` is fitted exactly by its neighbours; residual variance is zero",
            window.labels()[i]
        )));
    }
    Ok(NeighborhoodSet {
        node: i,
        label: window.labels()[i].clone(),
        neighbors,
        coefficients,
        intercept: fit.intercept.unwrap_or(0.0),
        residual_variance,
        candidates_evaluated: candidates,
    })
}
