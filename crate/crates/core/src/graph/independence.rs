use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::panel::Panel;

/// Likelihood-ratio test of mutual independence (the empty graph).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmptyGraphTest {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Bartlett-corrected LRT: `−(n − 1 − (2p + 5)/6) · ln det R` against
/// χ² with `p(p − 1)/2` degrees of freedom, `R` the sample correlation matrix.
pub fn empty_graph_test(window: &Panel) -> Result<EmptyGraphTest> {
    let (n, p) = (window.n_obs(), window.n_cols());
    if n <= p {
        return Err(Error::InvalidInput(format!(
            "independence test needs n > p (n = {n}, p = {p})"
        )));
    }
    let df = p * (p - 1) / 2;
    let factor = n as f64 - 1.0 - (2 * p + 5) as f64 / 6.0;
    if factor <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "Bartlett factor is non-positive for n = {n}, p = {p}"
        )));
    }
    if df == 0 {
        return Ok(EmptyGraphTest {
            statistic: 0.0,
            df,
            p_value: 1.0,
        });
    }

    let centered: Vec<Vec<f64>> = window
        .columns()
        .iter()
        .map(|c| {
            let m = c.iter().sum::<f64>() / n as f64;
            c.iter().map(|v| v - m).collect()
        })
        .collect();
    let norms: Vec<f64> = centered
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    if let Some(j) = norms.iter().position(|&s| s == 0.0) {
        return Err(Error::Numerical(format!(
            "column `{}` is constant; correlation undefined",
            window.labels()[j]
        )));
    }
    let r = nalgebra::DMatrix::from_fn(p, p, |i, j| {
        if i == j {
            1.0
        } else {
            centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum::<f64>() / (norms[i] * norms[j])
        }
    });
    let chol = r
        .cholesky()
        .ok_or_else(|| Error::Numerical("sample correlation matrix is not positive definite".into()))?;
    let diag = chol.l().diagonal();
    // Pivots are conditional standard deviations; a vanishing one means a column
    // is (numerically) a combination of the others.
    if diag.iter().any(|d| d * d < 1e-12) {
        return Err(Error::Numerical("sample correlation matrix is singular".into()));
    }
    let ln_det: f64 = 2.0 * diag.iter().map(|d| d.ln()).sum::<f64>();
    let statistic = (-factor * ln_det).max(0.0);
    let chi = ChiSquared::new(df as f64).map_err(|e| Error::Numerical(e.to_string()))?;
    Ok(EmptyGraphTest {
        statistic,
        df,
        p_value: chi.sf(statistic).clamp(0.0, 1.0),
    })
}
