//! Linear-model primitives: least squares, ridge, lasso, BIC and exhaustive
//! best-subset search.
//!
//! Everything here is a pure function of its inputs.

mod lasso;
mod ols;
mod ridge;
mod subset;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub use lasso::{lasso_fit, lasso_fit_with, LassoOptions};
pub use ols::{ols_fit, ols_standard_errors};
pub use ridge::ridge_fit;
pub use subset::{best_subset_bic, SubsetModel, MAX_SUBSET_PREDICTORS};

/// Floor applied to the residual sum of squares inside [`bic_score`].
pub const RSS_FLOOR: f64 = 1e-12;

/// Relative pivot size below which a column counts as linearly dependent.
pub(crate) const RANK_TOL: f64 = 1e-10;

/// Gaussian-likelihood BIC: `n ln(max(rss, 1e-12) / n) + k ln n`.
///
/// `k` counts the non-intercept predictors.
pub fn bic_score(rss: f64, n: usize, k: usize) -> f64 {
    let n = n as f64;
    n * (rss.max(RSS_FLOOR) / n).ln() + k as f64 * n.ln()
}

/// A regression design: `n` observations of `p` columns, optionally with a
/// leading all-ones intercept column.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    values: DMatrix<f64>,
    intercept: bool,
}

impl DesignMatrix {
    pub fn new(values: DMatrix<f64>, intercept_included: bool) -> Result<Self> {
        if values.nrows() == 0 {
            return Err(Error::InvalidInput("design has no observations".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("design contains non-finite values".into()));
        }
        if intercept_included && (values.ncols() == 0 || values.column(0).iter().any(|&v| v != 1.0))
        {
            return Err(Error::InvalidInput(
                "intercept flagged but first column is not all ones".into(),
            ));
        }
        Ok(DesignMatrix {
            values,
            intercept: intercept_included,
        })
    }

    /// Builds a design from predictor columns, prepending an intercept when asked.
    pub fn from_columns<C: AsRef<[f64]>>(n: usize, columns: &[C], intercept: bool) -> Result<Self> {
        let offset = usize::from(intercept);
        if let Some(j) = columns.iter().position(|c| c.as_ref().len() != n) {
            return Err(Error::Dimension(format!(
                "predictor {j} has {} values, expected {n}",
                columns[j].as_ref().len()
            )));
        }
        let values = DMatrix::from_fn(n, columns.len() + offset, |t, j| {
            if j < offset {
                1.0
            } else {
                columns[j - offset].as_ref()[t]
            }
        });
        Self::new(values, intercept)
    }

    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn intercept_included(&self) -> bool {
        self.intercept
    }

    /// Column indices of the non-intercept predictors.
    pub fn predictor_indices(&self) -> std::ops::Range<usize> {
        usize::from(self.intercept)..self.cols()
    }

    /// Sub-design with the intercept (if any) followed by the given columns.
    pub(crate) fn select(&self, predictors: &[usize]) -> DesignMatrix {
        let mut idx = Vec::with_capacity(predictors.len() + 1);
        if self.intercept {
            idx.push(0);
        }
        idx.extend_from_slice(predictors);
        DesignMatrix {
            values: self.values.select_columns(idx.iter()),
            intercept: self.intercept,
        }
    }
}

/// Result of a linear fit.
///
/// `coefficients[m]` belongs to design column `subset[m]`; the intercept, if
/// the design has one, is reported separately.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    pub intercept: Option<f64>,
    pub coefficients: Vec<f64>,
    pub subset: Vec<usize>,
    pub residuals: Vec<f64>,
    pub rss: f64,
}

impl RegressionFit {
    pub(crate) fn from_parts(
        design: &DesignMatrix,
        subset: Vec<usize>,
        beta: &DVector<f64>,
        y: &DVector<f64>,
    ) -> Self {
        let residuals = y - design.values() * beta;
        let rss = residuals.norm_squared();
        let offset = usize::from(design.intercept_included());
        RegressionFit {
            intercept: design.intercept_included().then(|| beta[0]),
            coefficients: beta.iter().skip(offset).copied().collect(),
            subset,
            residuals: residuals.iter().copied().collect(),
            rss,
        }
    }

    /// Coefficient of design column `j`, zero when `j` is not in the model.
    pub fn coefficient_of(&self, j: usize) -> f64 {
        self.subset
            .iter()
            .position(|&s| s == j)
            .map_or(0.0, |m| self.coefficients[m])
    }

    /// Number of non-intercept predictors with a nonzero coefficient.
    pub fn active_count(&self) -> usize {
        self.coefficients.iter().filter(|c| **c != 0.0).count()
    }
}

pub(crate) fn check_response(design: &DesignMatrix, y: &[f64]) -> Result<DVector<f64>> {
    if y.len() != design.rows() {
        return Err(Error::Dimension(format!(
            "response has {} values, design has {} rows",
            y.len(),
            design.rows()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("response contains non-finite values".into()));
    }
    Ok(DVector::from_column_slice(y))
}
