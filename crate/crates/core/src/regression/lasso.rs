use nalgebra::DVector;

use super::{check_response, DesignMatrix, RegressionFit};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LassoOptions {
    pub max_sweeps: usize,
    /// Stop once the largest KKT violation on the standardised problem is below this.
    pub tolerance: f64,
}

impl Default for LassoOptions {
    fn default() -> Self {
        LassoOptions {
            max_sweeps: 10_000,
            tolerance: 1e-9,
        }
    }
}

/// Lasso by cyclic coordinate descent on `(1/2n)‖y − Xβ‖² + λ‖β‖₁`.
///
/// Predictors are standardised internally: centred when the design carries an
/// intercept, then scaled to unit mean square. The penalty and the KKT
/// conditions therefore live on the standardised columns; coefficients are
/// mapped back to the original scale. Constant columns get coefficient zero.
pub fn lasso_fit(x: &DesignMatrix, y: &[f64], lambda: f64) -> Result<RegressionFit> {
    lasso_fit_with(x, y, lambda, LassoOptions::default())
}

pub fn lasso_fit_with(
    x: &DesignMatrix,
    y: &[f64],
    lambda: f64,
    options: LassoOptions,
) -> Result<RegressionFit> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidInput(format!("lasso penalty must be ≥ 0, got {lambda}")));
    }
    let yv = check_response(x, y)?;
    let n = x.rows();
    let nf = n as f64;
    let center = x.intercept_included();
    let predictors: Vec<usize> = x.predictor_indices().collect();

    let y_mean = if center { yv.mean() } else { 0.0 };
    let mut means = Vec::with_capacity(predictors.len());
    let mut scales = Vec::with_capacity(predictors.len());
    let mut z: Vec<Vec<f64>> = Vec::with_capacity(predictors.len());
    for &j in &predictors {
        let col = x.values().column(j);
        let m = if center { col.mean() } else { 0.0 };
        let centered: Vec<f64> = col.iter().map(|v| v - m).collect();
        let s = (centered.iter().map(|v| v * v).sum::<f64>() / nf).sqrt();
        means.push(m);
        scales.push(s);
        z.push(if s > 0.0 {
            centered.iter().map(|v| v / s).collect()
        } else {
            vec![0.0; n]
        });
    }

    let mut b = vec![0.0; predictors.len()];
    let mut r: Vec<f64> = yv.iter().map(|v| v - y_mean).collect();
    let mut sweeps = 0;
    let mut violation = kkt_violation(&z, &scales, &r, &b, lambda);
    while violation > options.tolerance {
        if sweeps == options.max_sweeps {
            return Err(Error::LassoNotConverged {
                sweeps,
                violation,
                coefficients: original_scale(&b, &scales),
            });
        }
        for (j, zj) in z.iter().enumerate() {
            if scales[j] == 0.0 {
                continue;
            }
            let old = b[j];
            let rho = dot(zj, &r) / nf + old;
            let new = soft_threshold(rho, lambda);
            if new != old {
                let delta = new - old;
                for (ri, zi) in r.iter_mut().zip(zj) {
                    *ri -= delta * zi;
                }
                b[j] = new;
            }
        }
        sweeps += 1;
        // Recompute from scratch so the convergence check is not fooled by drift.
        r = residual(&yv, y_mean, &z, &b);
        violation = kkt_violation(&z, &scales, &r, &b, lambda);
    }

    let coef = original_scale(&b, &scales);
    let mut beta = DVector::zeros(x.cols());
    for (m, &j) in predictors.iter().enumerate() {
        beta[j] = coef[m];
    }
    if center {
        beta[0] = y_mean - coef.iter().zip(&means).map(|(c, m)| c * m).sum::<f64>();
    }
    Ok(RegressionFit::from_parts(x, predictors, &beta, &yv))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

fn residual(y: &DVector<f64>, y_mean: f64, z: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let mut r: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    for (zj, &bj) in z.iter().zip(b) {
        if bj != 0.0 {
            for (ri, zi) in r.iter_mut().zip(zj) {
                *ri -= bj * zi;
            }
        }
    }
    r
}

fn kkt_violation(z: &[Vec<f64>], scales: &[f64], r: &[f64], b: &[f64], lambda: f64) -> f64 {
    let n = r.len() as f64;
    z.iter()
        .zip(b)
        .zip(scales)
        .filter(|(_, &s)| s > 0.0)
        .map(|((zj, &bj), _)| {
            let g = dot(zj, r) / n;
            if bj == 0.0 {
                (g.abs() - lambda).max(0.0)
            } else {
                (g - lambda * bj.signum()).abs()
            }
        })
        .fold(0.0, f64::max)
}

fn original_scale(b: &[f64], scales: &[f64]) -> Vec<f64> {
    b.iter()
        .zip(scales)
        .map(|(&bj, &s)| if s > 0.0 { bj / s } else { 0.0 })
        .collect()
}
