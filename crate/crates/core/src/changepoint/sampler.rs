use rand::Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;

use super::{precompute_marginals, ChangepointPosterior, FirmSeries, Hyper, MarginalTable};
use crate::error::{Error, Result};
use crate::rng::{stream, TAG_GAMMA, TAG_OMEGA};

/// `p(γ = k | y, ω) ∝ exp(log_lik_k) ω_k`, normalised with a max shift.
pub fn gamma_conditional(table: &MarginalTable, omega: &[f64]) -> Result<Vec<f64>> {
    if omega.len() != table.log_lik.len() {
        return Err(Error::Dimension(format!(
            "ω has {} entries, table has {}",
            omega.len(),
            table.log_lik.len()
        )));
    }
    let mut w: Vec<f64> = table
        .log_lik
        .iter()
        .zip(omega)
        .map(|(&l, &o)| if o > 0.0 { l + o.ln() } else { f64::NEG_INFINITY })
        .collect();
    let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::Numerical(format!(
            "firm `{}` has no posterior mass under ω",
            table.firm_id
        )));
    }
    let mut total = 0.0;
    for v in &mut w {
        *v = (*v - max).exp();
        total += *v;
    }
    for v in &mut w {
        *v /= total;
    }
    Ok(w)
}

/// One draw from `Dirichlet(α + counts)`.
///
/// Gamma variates are formed in log space (`G(s) = G(s + 1) · U^{1/s}` for
/// small shapes) so tiny concentrations do not underflow to exact zeros
/// before normalisation. Coordinates with zero total concentration are 0.
pub fn sample_omega<R: Rng + ?Sized>(counts: &[usize], alpha: &[f64], rng: &mut R) -> Vec<f64> {
    assert_eq!(counts.len(), alpha.len(), "counts and α must align");
    let log_g: Vec<f64> = counts
        .iter()
        .zip(alpha)
        .map(|(&c, &a)| {
            let shape = a + c as f64;
            if shape <= 0.0 {
                f64::NEG_INFINITY
            } else if shape >= 1.0 {
                Gamma::new(shape, 1.0).expect("positive shape").sample(rng).ln()
            } else {
                let g = Gamma::new(shape + 1.0, 1.0).expect("positive shape").sample(rng);
                let u: f64 = rng.random::<f64>();
                // `random` is in [0, 1); reflect so ln never sees 0.
                g.ln() + (1.0 - u).ln() / shape
            }
        })
        .collect();
    let max = log_g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = log_g.iter().map(|v| (v - max).exp()).sum();
    log_g.iter().map(|v| (v - max).exp() / total).collect()
}

fn draw_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random::<f64>();
    let mut acc = 0.0;
    let mut last = 0;
    for (k, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = k;
            if u < acc {
                return k;
            }
        }
    }
    last
}

/// Which per-firm summary fills [`ChangepointPosterior::probs`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PosteriorSummary {
    /// Post-burn-in frequency of each sampled `γ`.
    #[default]
    Frequencies,
    /// Post-burn-in average of the exact conditional `p(γ | y, ω)`.
    RaoBlackwell,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GibbsOptions {
    pub iters: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub summary: PosteriorSummary,
    /// Hold `ω` at this vector instead of sampling it.
    pub fixed_omega: Option<Vec<f64>>,
    pub parallel: bool,
}

impl Default for GibbsOptions {
    fn default() -> Self {
        GibbsOptions {
            iters: 3000,
            burn_in: 500,
            seed: 0,
            summary: PosteriorSummary::Frequencies,
            fixed_omega: None,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GibbsResult {
    pub posteriors: Vec<ChangepointPosterior>,
    /// Post-burn-in mean of `ω`.
    pub omega_mean: Vec<f64>,
    pub frequencies: Vec<Vec<f64>>,
    pub rao_blackwell: Vec<Vec<f64>>,
    pub kept_sweeps: usize,
}

/// Precomputes every firm's marginal table, then runs [`gibbs_screen_tables`].
pub fn gibbs_screen(firms: &[FirmSeries], hyper: &Hyper, options: &GibbsOptions) -> Result<GibbsResult> {
    hyper.validate()?;
    let tables = if options.parallel {
        firms.par_iter().map(|f| precompute_marginals(f, hyper)).collect::<Result<Vec<_>>>()?
    } else {
        firms.iter().map(|f| precompute_marginals(f, hyper)).collect::<Result<Vec<_>>>()?
    };
    gibbs_screen_tables(&tables, &hyper.alpha, options)
}

struct FirmState<'a> {
    table: &'a MarginalTable,
    counts: Vec<u64>,
    rb: Vec<f64>,
}

/// Collapsed Gibbs sampler over `{γ_i}` and `ω`.
///
/// Each sweep draws every `γ_i` from its exact conditional given `ω`, then
/// `ω` from `Dirichlet(α + counts)`. Firm `i`'s draw in sweep `s` uses its own
/// stream keyed by `(seed, s, i)`, so the result does not depend on
/// `parallel`.
pub fn gibbs_screen_tables(
    tables: &[MarginalTable],
    alpha: &[f64],
    options: &GibbsOptions,
) -> Result<GibbsResult> {
    if tables.is_empty() {
        return Err(Error::InvalidInput("no firms to screen".into()));
    }
    if options.iters <= options.burn_in {
        return Err(Error::InvalidInput(format!(
            "iters ({}) must exceed burn-in ({})",
            options.iters, options.burn_in
        )));
    }
    let k = alpha.len();
    if let Some(t) = tables.iter().find(|t| t.log_lik.len() != k) {
        return Err(Error::Dimension(format!(
            "firm `{}` has {} hypotheses, α has {k}",
            t.firm_id,
            t.log_lik.len()
        )));
    }
    let alpha_total: f64 = alpha.iter().sum();
    let mut omega = match &options.fixed_omega {
        Some(w) => {
            if w.len() != k || w.iter().any(|v| !(*v >= 0.0)) || w.iter().sum::<f64>() <= 0.0 {
                return Err(Error::InvalidInput("fixed ω must be a nonnegative vector over {0, …, n}".into()));
            }
            let s: f64 = w.iter().sum();
            w.iter().map(|v| v / s).collect()
        }
        None => alpha.iter().map(|a| a / alpha_total).collect::<Vec<f64>>(),
    };

    let mut states: Vec<FirmState> = tables
        .iter()
        .map(|table| FirmState {
            table,
            counts: vec![0; k],
            rb: vec![0.0; k],
        })
        .collect();
    let mut omega_sum = vec![0.0; k];
    let seed = options.seed;

    for sweep in 0..options.iters {
        let keep = sweep >= options.burn_in;
        let step = |(i, st): (usize, &mut FirmState)| -> Result<usize> {
            let probs = gamma_conditional(st.table, &omega)?;
            let mut rng = stream(seed, &[TAG_GAMMA, sweep as u64, i as u64]);
            let g = draw_index(&probs, &mut rng);
            if keep {
                st.counts[g] += 1;
                for (acc, p) in st.rb.iter_mut().zip(&probs) {
                    *acc += p;
                }
            }
            Ok(g)
        };
        let gammas: Vec<usize> = if options.parallel {
            states.par_iter_mut().enumerate().map(step).collect::<Result<_>>()?
        } else {
            states.iter_mut().enumerate().map(step).collect::<Result<_>>()?
        };
        if options.fixed_omega.is_none() {
            let mut tally = vec![0usize; k];
            for g in gammas {
                tally[g] += 1;
            }
            let mut rng = stream(seed, &[TAG_OMEGA, sweep as u64]);
            omega = sample_omega(&tally, alpha, &mut rng);
        }
        if keep {
            for (acc, w) in omega_sum.iter_mut().zip(&omega) {
                *acc += w;
            }
        }
    }

    let kept = (options.iters - options.burn_in) as f64;
    let frequencies: Vec<Vec<f64>> = states
        .iter()
        .map(|s| s.counts.iter().map(|&c| c as f64 / kept).collect())
        .collect();
    let rao_blackwell: Vec<Vec<f64>> = states
        .iter()
        .map(|s| s.rb.iter().map(|&v| v / kept).collect())
        .collect();
    let chosen = match options.summary {
        PosteriorSummary::Frequencies => &frequencies,
        PosteriorSummary::RaoBlackwell => &rao_blackwell,
    };
    let posteriors = tables
        .iter()
        .zip(chosen)
        .map(|(t, p)| ChangepointPosterior::new(t.firm_id.clone(), p.clone()))
        .collect();
    Ok(GibbsResult {
        posteriors,
        omega_mean: omega_sum.iter().map(|v| v / kept).collect(),
        frequencies,
        rao_blackwell,
        kept_sweeps: options.iters - options.burn_in,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn table(log_lik: Vec<f64>) -> MarginalTable {
        MarginalTable {
            firm_id: "f".into(),
            log_lik,
        }
    }

    #[test]
    fn degenerate_omega_gives_unit_mass() {
        let p = gamma_conditional(&table(vec![-3.0, -1.0, -2.0]), &[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(p, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn constant_likelihood_returns_omega() {
        let w = [0.2, 0.5, 0.3];
        let p = gamma_conditional(&table(vec![-7.5; 3]), &w).unwrap();
        for (a, b) in p.iter().zip(&w) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn survives_extreme_log_likelihoods() {
        let p = gamma_conditional(&table(vec![-1e4, -1e4 + 2.0, -2e4]), &[0.5, 0.25, 0.25]).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p[1] > p[0]);
    }

    #[test]
    fn dominant_concentration_wins() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = sample_omega(&[1_000_000, 0, 0], &[0.8, 0.1, 0.1], &mut rng);
        assert!(w[0] > 0.9999);
    }

    #[test]
    fn tiny_concentrations_stay_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let w = sample_omega(&[0, 0, 200], &[1e-3, 1e-3, 1.0], &mut rng);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(w.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn rejects_bad_iteration_counts() {
        let opts = GibbsOptions {
            iters: 10,
            burn_in: 10,
            ..Default::default()
        };
        assert!(gibbs_screen_tables(&[table(vec![0.0; 3])], &[1.0; 3], &opts).is_err());
        assert!(gibbs_screen_tables(&[], &[1.0; 3], &GibbsOptions::default()).is_err());
    }
}
