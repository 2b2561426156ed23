//! Dated, column-labelled numeric panels.

use chrono::NaiveDate;
use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A dated matrix of aligned series, stored column-major.
///
/// Used both for raw returns and for factor-model residuals; every column has
/// one finite value per date and dates are strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    dates: Vec<NaiveDate>,
    labels: Vec<String>,
    columns: Vec<Vec<f64>>,
}

pub type ReturnPanel = Panel;
pub type ResidualPanel = Panel;

impl Panel {
    pub fn new(dates: Vec<NaiveDate>, labels: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if labels.len() != columns.len() {
            return Err(Error::Dimension(format!(
                "{} labels for {} columns",
                labels.len(),
                columns.len()
            )));
        }
        if let Some(w) = dates.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(format!(
                "dates not strictly increasing at position {}: {} then {}",
                w + 1,
                dates[w],
                dates[w + 1]
            )));
        }
        for (label, col) in labels.iter().zip(&columns) {
            if col.len() != dates.len() {
                return Err(Error::Dimension(format!(
                    "column `{label}` has {} values for {} dates",
                    col.len(),
                    dates.len()
                )));
            }
            if let Some(t) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "column `{label}` has a non-finite value on {}",
                    dates[t]
                )));
            }
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::InvalidInput(format!("duplicate column label `{l}`")));
            }
        }
        Ok(Panel {
            dates,
            labels,
            columns,
        })
    }

    pub fn n_obs(&self) -> usize {
        self.dates.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn column_by_label(&self, label: &str) -> Option<&[f64]> {
        self.index_of(label).map(|j| self.columns[j].as_slice())
    }

    /// Rows `start..start + len` as a new panel.
    pub fn window(&self, start: usize, len: usize) -> Result<Panel> {
        let end = start
            .checked_add(len)
            .filter(|&e| e <= self.n_obs())
            .ok_or_else(|| {
                Error::Dimension(format!(
                    "window {start}+{len} exceeds panel length {}",
                    self.n_obs()
                ))
            })?;
        Ok(Panel {
            dates: self.dates[start..end].to_vec(),
            labels: self.labels.clone(),
            columns: self.columns.iter().map(|c| c[start..end].to_vec()).collect(),
        })
    }

    /// Observations as an `n_obs × n_cols` matrix.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n_obs(), self.n_cols(), |t, j| self.columns[j][t])
    }
}
