use statrs::function::gamma::ln_gamma;

use super::{DfConvention, FirmSeries, Hyper, ScaleConvention};
use crate::error::{Error, Result};

/// Count, mean and centred sum of squares of a block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockStats {
    pub count: usize,
    pub mean: f64,
    pub centered_ss: f64,
}

impl BlockStats {
    pub fn of(values: &[f64]) -> Self {
        let count = values.len();
        if count == 0 {
            return BlockStats {
                count,
                mean: 0.0,
                centered_ss: 0.0,
            };
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let centered_ss = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        BlockStats {
            count,
            mean,
            centered_ss,
        }
    }
}

/// Log multivariate-T density of a block from its sufficient statistics.
///
/// The scale matrix is `c (I + τ² 11ᵀ)` under signal and `c I` otherwise, so
/// `ln det = d ln c + ln(1 + dτ²)` and the quadratic form is
/// `(yᵀy − τ²(Σy)²/(1 + dτ²)) / c`, evaluated in the centred form
/// `Σ(y − ȳ)² + dȳ²/(1 + dτ²)`.
pub fn log_marginal_from_stats(stats: BlockStats, hyper: &Hyper, signal: bool) -> f64 {
    let d = stats.count;
    if d == 0 {
        return 0.0;
    }
    let df = d as f64;
    let c = match hyper.scale {
        ScaleConvention::ShapeOverScale => hyper.a / hyper.b,
        ScaleConvention::ScaleOverShape => hyper.b / hyper.a,
    };
    let nu = match hyper.df {
        DfConvention::ShapePlusBlock => hyper.a + df,
        DfConvention::Shape => hyper.a,
    };
    let mean_part = df * stats.mean * stats.mean;
    let (quad, ln_det_m) = if signal {
        let g = 1.0 + df * hyper.tau2;
        (stats.centered_ss + mean_part / g, g.ln())
    } else {
        (stats.centered_ss + mean_part, 0.0)
    };
    let quad = quad / c;
    let ln_det = df * c.ln() + ln_det_m;
    ln_gamma((nu + df) / 2.0) - ln_gamma(nu / 2.0) - 0.5 * df * (nu * std::f64::consts::PI).ln()
        - 0.5 * ln_det
        - 0.5 * (nu + df) * (quad / nu).ln_1p()
}

/// Log marginal density of `y_s` under the signal (`θ` free) or null (`θ = 0`)
/// block model. The empty block has log density 0.
pub fn block_log_marginal(y: &[f64], hyper: &Hyper, signal: bool) -> Result<f64> {
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("block contains non-finite values".into()));
    }
    Ok(log_marginal_from_stats(BlockStats::of(y), hyper, signal))
}

/// `log p(y_i | γ_i = k)` for `k = 0, …, n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalTable {
    pub firm_id: String,
    pub log_lik: Vec<f64>,
}

impl MarginalTable {
    pub fn n(&self) -> usize {
        self.log_lik.len() - 1
    }
}

/// Entry 0 is the null model on all observations. Entry `k ≥ 1` is the
/// product of the signal marginals of `ℓ_k` (times ≤ k) and `r_k` (times > k);
/// `r_n` is empty. Splits that leave the same partition share one value.
pub fn precompute_marginals(firm: &FirmSeries, hyper: &Hyper) -> Result<MarginalTable> {
    let n = hyper.n();
    let wrap = |e: Error| e.in_firm(&firm.firm_id);
    if let Some(&t) = firm.times.iter().find(|&&t| t == 0 || t > n) {
        return Err(wrap(Error::InvalidInput(format!(
            "observation time {t} outside the grid 1..={n}"
        ))));
    }
    if firm.values.iter().any(|v| !v.is_finite()) {
        return Err(wrap(Error::InvalidInput("non-finite value".into())));
    }
    let m = firm.len();
    // Split index s: the first s observations form ℓ.
    let by_split: Vec<f64> = (0..=m)
        .map(|s| {
            log_marginal_from_stats(BlockStats::of(&firm.values[..s]), hyper, true)
                + log_marginal_from_stats(BlockStats::of(&firm.values[s..]), hyper, true)
        })
        .collect();
    let mut log_lik = Vec::with_capacity(n + 1);
    log_lik.push(log_marginal_from_stats(BlockStats::of(&firm.values), hyper, false));
    let mut s = 0;
    for k in 1..=n {
        while s < m && firm.times[s] <= k {
            s += 1;
        }
        log_lik.push(by_split[s]);
    }
    if let Some(k) = log_lik.iter().position(|v| !v.is_finite()) {
        return Err(wrap(Error::Numerical(format!("log marginal for k = {k} is not finite"))));
    }
    Ok(MarginalTable {
        firm_id: firm.firm_id.clone(),
        log_lik,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_block_is_zero() {
        let h = Hyper::defaults(5).unwrap();
        assert_eq!(block_log_marginal(&[], &h, true).unwrap(), 0.0);
        assert_eq!(block_log_marginal(&[], &h, false).unwrap(), 0.0);
    }

    #[test]
    fn null_block_at_origin_is_central_t_density() {
        // d = 3, a = b = 2: df 5, scale I, density Γ(4)/(Γ(5/2) (5π)^{3/2}).
        let h = Hyper::defaults(5).unwrap();
        let got = block_log_marginal(&[0.0; 3], &h, false).unwrap();
        let expected = (6.0_f64).ln() - ln_gamma(2.5) - 1.5 * (5.0 * std::f64::consts::PI).ln();
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_finite() {
        let h = Hyper::defaults(5).unwrap();
        assert!(block_log_marginal(&[1.0, f64::INFINITY], &h, true).is_err());
    }

    #[test]
    fn zero_series_prefers_null() {
        let h = Hyper::defaults(10).unwrap();
        let f = FirmSeries::new("z", (1..=10).collect(), vec![0.0; 10]).unwrap();
        let t = precompute_marginals(&f, &h).unwrap();
        let best = t.log_lik.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(t.log_lik[0], best);
        assert!(t.log_lik[1..].iter().all(|&v| v < t.log_lik[0]));
    }

    #[test]
    fn unobserved_years_share_partitions() {
        let h = Hyper::defaults(10).unwrap();
        let f = FirmSeries::new("g", vec![1, 2, 6, 7, 9], vec![0.3, -0.1, 2.0, 2.4, 1.8]).unwrap();
        let t = precompute_marginals(&f, &h).unwrap();
        // No observations at 3, 4, 5: splits 2..=5 give identical partitions.
        assert_eq!(t.log_lik[2], t.log_lik[3]);
        assert_eq!(t.log_lik[2], t.log_lik[5]);
        assert_ne!(t.log_lik[5], t.log_lik[6]);
        // After the last observation r_k is empty, as at k = n.
        assert_eq!(t.log_lik[9], t.log_lik[10]);
    }

    #[test]
    fn times_outside_grid_rejected() {
        let h = Hyper::defaults(5).unwrap();
        let f = FirmSeries::new("o", vec![1, 6], vec![0.0, 1.0]).unwrap();
        assert!(precompute_marginals(&f, &h).is_err());
    }
}
