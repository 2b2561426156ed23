use std::cmp::Ordering;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{bic_score, check_response, ols_fit, DesignMatrix, RegressionFit, RANK_TOL};
use crate::error::{Error, Result};

/// Largest predictor count [`best_subset_bic`] will enumerate.
pub const MAX_SUBSET_PREDICTORS: usize = 25;

/// Masks per parallel task once enumeration is large enough to split.
const PARALLEL_CHUNK: usize = 1 << 10;

/// The BIC-optimal subset together with its refitted regression.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetModel {
    /// Selected design columns, ascending.
    pub subset: Vec<usize>,
    pub fit: RegressionFit,
    pub bic: f64,
    /// Number of candidate subsets scored, including skipped ones.
    pub candidates_evaluated: usize,
    /// Candidates dropped because their columns were collinear.
    pub skipped: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    mask: u32,
    bic: f64,
}

impl Candidate {
    /// Lower BIC, then fewer predictors, then the lexicographically smaller index set.
    fn cmp(&self, other: &Candidate) -> Ordering {
        self.bic
            .total_cmp(&other.bic)
            .then(self.mask.count_ones().cmp(&other.mask.count_ones()))
            .then_with(|| mask_indices(self.mask).cmp(&mask_indices(other.mask)))
    }
}

fn mask_indices(mask: u32) -> Vec<u32> {
    (0..32).filter(|b| mask & (1 << b) != 0).collect()
}

/// Centred cross-products: the intercept is profiled out by centring.
struct Gram {
    xx: DMatrix<f64>,
    xy: Vec<f64>,
    yy: f64,
}

impl Gram {
    fn new(x: &DesignMatrix, predictors: &[usize], y: &[f64]) -> Self {
        let n = y.len() as f64;
        let y_mean = y.iter().sum::<f64>() / n;
        let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
        let cols: Vec<Vec<f64>> = predictors
            .iter()
            .map(|&j| {
                let c = x.values().column(j);
                let m = c.mean();
                c.iter().map(|v| v - m).collect()
            })
            .collect();
        let p = cols.len();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>();
        let xx = DMatrix::from_fn(p, p, |i, j| dot(&cols[i], &cols[j]));
        let xy = cols.iter().map(|c| dot(c, &yc)).collect();
        Gram {
            xx,
            xy,
            yy: dot(&yc, &yc),
        }
    }

    /// RSS of the intercept-plus-`mask` model, or `None` when the selected
    /// columns are collinear.
    fn rss(&self, mask: u32) -> Option<f64> {
        let idx: Vec<usize> = (0..self.xy.len()).filter(|&b| mask & (1 << b) != 0).collect();
        let k = idx.len();
        // In-place Cholesky of the k×k principal submatrix.
        let mut l = vec![0.0; k * k];
        for a in 0..k {
            for b in 0..=a {
                let mut s = self.xx[(idx[a], idx[b])];
                for c in 0..b {
                    s -= l[a * k + c] * l[b * k + c];
                }
                if a == b {
                    let diag = self.xx[(idx[a], idx[a])];
                    if diag <= 0.0 || s <= RANK_TOL * RANK_TOL * diag {
                        return None;
                    }
                    l[a * k + a] = s.sqrt();
                } else {
                    l[a * k + b] = s / l[b * k + b];
                }
            }
        }
        // Forward solve L z = Xᵀy; explained sum of squares is ‖z‖².
        let mut z = vec![0.0; k];
        for a in 0..k {
            let mut s = self.xy[idx[a]];
            for c in 0..a {
                s -= l[a * k + c] * z[c];
            }
            z[a] = s / l[a * k + a];
        }
        Some((self.yy - z.iter().map(|v| v * v).sum::<f64>()).max(0.0))
    }
}

/// Exhaustive BIC search over every subset of the design's predictors.
///
/// An intercept is always in the model and not counted in `k`; when the design
/// lacks an intercept column one is profiled out by centring. Ties go to the
/// smaller subset, then to the lexicographically smaller index set. Collinear
/// candidates are skipped and listed in [`SubsetModel::skipped`].
pub fn best_subset_bic(x: &DesignMatrix, y: &[f64]) -> Result<SubsetModel> {
    check_response(x, y)?;
    let predictors: Vec<usize> = x.predictor_indices().collect();
    let p = predictors.len();
    let n = x.rows();
    if p > MAX_SUBSET_PREDICTORS {
        return Err(Error::TooManyPredictors {
            p,
            limit: MAX_SUBSET_PREDICTORS,
        });
    }
    if n <= p + 1 {
        return Err(Error::InvalidInput(format!(
            "subset search needs more observations than parameters (n = {n}, p = {p} plus intercept)"
        )));
    }

    let gram = Gram::new(x, &predictors, y);
    let total: u32 = 1 << p;
    let score = |mask: u32| {
        gram.rss(mask).map(|rss| Candidate {
            mask,
            bic: bic_score(rss, n, mask.count_ones() as usize),
        })
    };
    let better = |a: Option<Candidate>, b: Option<Candidate>| match (a, b) {
        (Some(a), Some(b)) => Some(if b.cmp(&a) == Ordering::Less { b } else { a }),
        (a, None) => a,
        (None, b) => b,
    };

    let (best, skipped_masks) = if (total as usize) <= PARALLEL_CHUNK {
        let mut best = None;
        let mut skipped = Vec::new();
        for mask in 0..total {
            match score(mask) {
                Some(c) => best = better(best, Some(c)),
                None => skipped.push(mask),
            }
        }
        (best, skipped)
    } else {
        // The comparison is a total order, so chunked reduction yields the same winner.
        let chunks = (total as usize).div_ceil(PARALLEL_CHUNK);
        let parts: Vec<(Option<Candidate>, Vec<u32>)> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let lo = (c * PARALLEL_CHUNK) as u32;
                let hi = ((c + 1) * PARALLEL_CHUNK).min(total as usize) as u32;
                let mut best = None;
                let mut skipped = Vec::new();
                for mask in lo..hi {
                    match score(mask) {
                        Some(cand) => best = better(best, Some(cand)),
                        None => skipped.push(mask),
                    }
                }
                (best, skipped)
            })
            .collect();
        parts
            .into_iter()
            .fold((None, Vec::new()), |(b, mut s), (pb, ps)| {
                s.extend(ps);
                (better(b, pb), s)
            })
    };

    // The empty model is never collinear, so a winner always exists.
    let best = best.expect("intercept-only model is always scorable");
    let to_cols = |mask: u32| -> Vec<usize> {
        (0..p).filter(|&b| mask & (1 << b) != 0).map(|b| predictors[b]).collect()
    };
    let subset = to_cols(best.mask);
    let fit = refit(x, &subset, y)?;
    let bic = bic_score(fit.rss, n, subset.len());
    Ok(SubsetModel {
        subset,
        fit,
        bic,
        candidates_evaluated: total as usize,
        skipped: skipped_masks.into_iter().map(to_cols).collect(),
    })
}

fn refit(x: &DesignMatrix, subset: &[usize], y: &[f64]) -> Result<RegressionFit> {
    let sub = if x.intercept_included() {
        x.select(subset)
    } else {
        let cols: Vec<Vec<f64>> = subset
            .iter()
            .map(|&j| x.values().column(j).iter().copied().collect())
            .collect();
        DesignMatrix::from_columns(x.rows(), &cols, true)?
    };
    let mut fit = ols_fit(&sub, y)?;
    fit.subset = subset.to_vec();
    Ok(fit)
}
