//! Reference implementations used only by the test suites. Each one takes a
//! deliberately different numerical route from the library code it checks.
#![allow(dead_code)]

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use partition_core::Panel;
use statrs::function::gamma::ln_gamma;

/// Multivariate-t log density with location 0, `nu` degrees of freedom and
/// dense scale matrix `scale`, via an explicit inverse and a Cholesky log-det.
pub fn mvt_log_density(y: &[f64], nu: f64, scale: &DMatrix<f64>) -> f64 {
    let d = y.len() as f64;
    let v = DVector::from_column_slice(y);
    let chol = scale.clone().cholesky().expect("scale must be positive definite");
    let ln_det = 2.0 * chol.l().diagonal().iter().map(|x| x.ln()).sum::<f64>();
    let inv = scale.clone().try_inverse().expect("invertible");
    let quad = (v.transpose() * inv * &v)[(0, 0)];
    ln_gamma((nu + d) / 2.0) - ln_gamma(nu / 2.0) - 0.5 * d * (nu * std::f64::consts::PI).ln() - 0.5 * ln_det
        - 0.5 * (nu + d) * (1.0 + quad / nu).ln()
}

/// `c (I + τ² 11ᵀ)` or `c I`.
pub fn block_scale(d: usize, c: f64, tau2: f64, signal: bool) -> DMatrix<f64> {
    let extra = if signal { tau2 } else { 0.0 };
    DMatrix::from_fn(d, d, |i, j| c * (f64::from(u8::from(i == j)) + extra))
}

/// Ordinary least squares by solving the normal equations with LU.
/// Returns `None` when `XᵀX` is numerically singular.
pub fn normal_equations(x: &DMatrix<f64>, y: &[f64]) -> Option<(DVector<f64>, f64)> {
    let yv = DVector::from_column_slice(y);
    if x.ncols() == 0 {
        return Some((DVector::zeros(0), yv.norm_squared()));
    }
    let xtx = x.transpose() * x;
    let scale = xtx.diagonal().max().max(1.0);
    let eig = nalgebra::SymmetricEigen::new(xtx.clone()).eigenvalues;
    if eig.min() <= 1e-10 * scale {
        return None;
    }
    let beta = xtx.lu().solve(&(x.transpose() * &yv))?;
    let rss = (yv - x * &beta).norm_squared();
    Some((beta, rss))
}

/// Exhaustive BIC search written as a plain loop over bitmasks, intercept
/// always included. Returns the winning predictor indices (0-based into
/// `cols`) and its BIC, using the documented tie order.
pub fn naive_best_subset(cols: &[Vec<f64>], y: &[f64]) -> (Vec<usize>, f64) {
    let n = y.len();
    let p = cols.len();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for mask in 0u32..(1 << p) {
        let set: Vec<usize> = (0..p).filter(|j| mask >> j & 1 == 1).collect();
        let x = DMatrix::from_fn(n, set.len() + 1, |r, c| if c == 0 { 1.0 } else { cols[set[c - 1]][r] });
        let Some((_, rss)) = normal_equations(&x, y) else { continue };
        let bic = n as f64 * (rss.max(1e-12) / n as f64).ln() + set.len() as f64 * (n as f64).ln();
        let better = match &best {
            None => true,
            Some((b, s)) => {
                bic < *b - 1e-9 * b.abs().max(1.0)
                    || ((bic - b).abs() <= 1e-9 * b.abs().max(1.0)
                        && (set.len() < s.len() || (set.len() == s.len() && set < *s)))
            }
        };
        if better {
            best = Some((bic, set));
        }
    }
    let (bic, set) = best.expect("the empty model is always feasible");
    (set, bic)
}

pub fn dates(n: usize) -> Vec<NaiveDate> {
    let d0 = NaiveDate::from_ymd_opt(2005, 1, 3).unwrap();
    (0..n).map(|t| d0 + chrono::Days::new(t as u64)).collect()
}

pub fn panel(cols: Vec<Vec<f64>>) -> Panel {
    let labels = (0..cols.len()).map(|j| format!("V{j}")).collect();
    Panel::new(dates(cols[0].len()), labels, cols).unwrap()
}

/// Sample covariance with divisor `denom`.
pub fn covariance(cols: &[Vec<f64>], denom: f64) -> DMatrix<f64> {
    let p = cols.len();
    let n = cols[0].len() as f64;
    let means: Vec<f64> = cols.iter().map(|c| c.iter().sum::<f64>() / n).collect();
    DMatrix::from_fn(p, p, |i, j| {
        cols[i]
            .iter()
            .zip(&cols[j])
            .map(|(a, b)| (a - means[i]) * (b - means[j]))
            .sum::<f64>()
            / denom
    })
}

/// Two-sided one-sample Kolmogorov-Smirnov distance to Uniform(0, 1).
pub fn ks_uniform(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let lo = x - i as f64 / n;
            let hi = (i + 1) as f64 / n - x;
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}

pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Edge F1 of `estimated` against `truth` over unordered pairs.
pub fn edge_f1(truth: &[(usize, usize)], estimated: &[(usize, usize)]) -> f64 {
    let tp = estimated.iter().filter(|e| truth.contains(e)).count() as f64;
    if tp == 0.0 {
        return if truth.is_empty() && estimated.is_empty() { 1.0 } else { 0.0 };
    }
    let precision = tp / estimated.len() as f64;
    let recall = tp / truth.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

/// Standardised copies (centred, unit mean square) so the penalty acts on the
/// columns as given.
pub fn standardise(cols: &mut [Vec<f64>]) {
    for c in cols.iter_mut() {
        let n = c.len() as f64;
        let m = c.iter().sum::<f64>() / n;
        c.iter_mut().for_each(|v| *v -= m);
        let s = (c.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
        c.iter_mut().for_each(|v| *v /= s);
    }
}

pub fn lasso_kkt_violation(cols: &[Vec<f64>], y: &[f64], lambda: f64, intercept: f64, beta: &[f64]) -> f64 {
    let n = y.len();
    let r: Vec<f64> = (0..n)
        .map(|t| y[t] - intercept - cols.iter().zip(beta).map(|(c, b)| c[t] * b).sum::<f64>())
        .collect();
    cols.iter()
        .zip(beta)
        .map(|(c, &b)| {
            let g = c.iter().zip(&r).map(|(u, v)| u * v).sum::<f64>() / n as f64;
            if b == 0.0 {
                (g.abs() - lambda).max(0.0)
            } else {
                (g - lambda * b.signum()).abs()
            }
        })
        .fold(0.0, f64::max)
}
