use nalgebra::{DMatrix, SymmetricEigen};

use super::{Adjacency, NeighborhoodSet};
use crate::error::{Error, Result};

/// Added on top of `|λ_min|` when shifting a non-PD precision matrix.
pub const PD_SHIFT_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceEstimate {
    pub sigma: DMatrix<f64>,
    pub precision: DMatrix<f64>,
    /// Amount added to the diagonal of the precision matrix (0 if it was already PD).
    pub pd_shift: f64,
}

/// Reassembles node-wise regressions into a precision matrix and its inverse.
///
/// `Ω_ii = 1/v_i` and, for each edge, `Ω_ij` is the average of
/// `−β_{i←j}/v_i` and `−β_{j←i}/v_j` (a missing coefficient counts as 0).
/// Off-edge entries are exactly zero. A non-PD result is repaired by adding
/// `|λ_min| + 1e-8` to the diagonal, which keeps the zero pattern.
pub fn reconstruct_covariance(
    neighborhoods: &[NeighborhoodSet],
    adjacency: &Adjacency,
) -> Result<CovarianceEstimate> {
    let p = neighborhoods.len();
    if adjacency.size() != p {
        return Err(Error::Dimension(format!(
            "adjacency is {0}×{0} but there are {p} neighbourhoods",
            adjacency.size()
        )));
    }
    let mut omega = DMatrix::zeros(p, p);
    for (i, nb) in neighborhoods.iter().enumerate() {
        if !(nb.residual_variance > 0.0 && nb.residual_variance.is_finite()) {
            return Err(Error::Numerical(format!(
                "node {i} has residual variance {}",
                nb.residual_variance
            )));
        }
        omega[(i, i)] = 1.0 / nb.residual_variance;
    }
    for (i, j) in adjacency.edges() {
        let a = -neighborhoods[i].coefficient_of(j) / neighborhoods[i].residual_variance;
        let b = -neighborhoods[j].coefficient_of(i) / neighborhoods[j].residual_variance;
        let v = 0.5 * (a + b);
        omega[(i, j)] = v;
        omega[(j, i)] = v;
    }

    let min_eig = SymmetricEigen::new(omega.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let pd_shift = if min_eig > 0.0 {
        0.0
    } else {
        min_eig.abs() + PD_SHIFT_EPS
    };
    if pd_shift > 0.0 {
        for i in 0..p {
            omega[(i, i)] += pd_shift;
        }
    }
    let sigma = omega
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical("precision matrix singular after eigenvalue shift".into()))?
        .inverse();
    // Cholesky inverse is symmetric up to rounding; make it exact.
    let sigma = (&sigma + sigma.transpose()) * 0.5;
    Ok(CovarianceEstimate {
        sigma,
        precision: omega,
        pd_shift,
    })
}
