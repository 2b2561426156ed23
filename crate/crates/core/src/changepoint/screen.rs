use super::FirmSeries;
use crate::error::{Error, Result};

/// Posterior over `{0, …, n}` for one firm plus its screening statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct ChangepointPosterior {
    pub firm_id: String,
    pub probs: Vec<f64>,
    /// Largest interior probability, `max_{0<j<n} probs[j]`.
    pub pm: f64,
    /// Smallest interior `j` attaining `pm`.
    pub argmax_interior: usize,
}

impl ChangepointPosterior {
    /// `probs` must cover `{0, …, n}` with `n ≥ 2`.
    pub fn new(firm_id: String, probs: Vec<f64>) -> Self {
        let n = probs.len() - 1;
        assert!(n >= 2, "posterior needs at least one interior changepoint");
        let (argmax_interior, pm) = (1..n).fold((1, probs[1]), |(bj, bp), j| {
            if probs[j] > bp {
                (j, probs[j])
            } else {
                (bj, bp)
            }
        });
        ChangepointPosterior {
            firm_id,
            probs,
            pm,
            argmax_interior,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScreenEntry {
    /// 1-based.
    pub rank: usize,
    pub firm_id: String,
    pub pm: f64,
    /// Grid index of the most probable interior changepoint.
    pub changepoint: usize,
}

/// Firms whose `pm ≥ cutoff`, by `pm` descending then `firm_id`.
pub fn screen(posteriors: &[ChangepointPosterior], cutoff: f64) -> Result<Vec<ScreenEntry>> {
    if !(cutoff > 0.0 && cutoff <= 1.0) {
        return Err(Error::InvalidInput(format!("cutoff must lie in (0, 1], got {cutoff}")));
    }
    let mut hits: Vec<&ChangepointPosterior> = posteriors.iter().filter(|p| p.pm >= cutoff).collect();
    hits.sort_by(|a, b| b.pm.total_cmp(&a.pm).then_with(|| a.firm_id.cmp(&b.firm_id)));
    Ok(hits
        .into_iter()
        .enumerate()
        .map(|(r, p)| ScreenEntry {
            rank: r + 1,
            firm_id: p.firm_id.clone(),
            pm: p.pm,
            changepoint: p.argmax_interior,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohortFilter {
    pub retained: Vec<FirmSeries>,
    pub dropped: usize,
}

/// Keeps firms with at least `min_obs` observations.
pub fn filter_cohort(firms: Vec<FirmSeries>, min_obs: usize) -> Result<CohortFilter> {
    if min_obs == 0 {
        return Err(Error::InvalidInput("min_obs must be ≥ 1".into()));
    }
    let total = firms.len();
    let retained: Vec<FirmSeries> = firms.into_iter().filter(|f| f.len() >= min_obs).collect();
    Ok(CohortFilter {
        dropped: total - retained.len(),
        retained,
    })
}
