//! Cross-sectional changepoint screening.
//!
//! Every firm carries an indicator `γ ∈ {0, …, n}`: `0` means the series is
//! pure noise, `n` a constant nonzero level, and `0 < k < n` a level shift
//! after year `k`. Each block of observations has a constant level
//! `θ ~ N(0, σ²τ²)` with `σ² ~ IG(a/2, b/2)`; integrating both out leaves a
//! multivariate-T marginal per block, so every `p(y_i | γ_i = k)` is
//! precomputed once. The sampler then only alternates between the
//! indicators and the shared mixing weights `ω ~ Dirichlet(α)`.

mod marginal;
mod sampler;
mod screen;

pub use marginal::{block_log_marginal, log_marginal_from_stats, precompute_marginals, BlockStats, MarginalTable};
pub use sampler::{gamma_conditional, gibbs_screen, gibbs_screen_tables, sample_omega, GibbsOptions, GibbsResult, PosteriorSummary};
pub use screen::{filter_cohort, screen, ChangepointPosterior, CohortFilter, ScreenEntry};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// One firm's benchmarked performance at integer observation times.
#[derive(Debug, Clone, PartialEq)]
pub struct FirmSeries {
    pub firm_id: String,
    /// Strictly increasing, each ≥ 1.
    pub times: Vec<usize>,
    pub values: Vec<f64>,
}

impl FirmSeries {
    pub fn new(firm_id: impl Into<String>, times: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let firm_id = firm_id.into();
        let fail = |m: String| Err(Error::InvalidInput(m).in_firm(&firm_id));
        if times.is_empty() {
            return fail("no observations".into());
        }
        if times.len() != values.len() {
            return fail(format!("{} times for {} values", times.len(), values.len()));
        }
        if times[0] == 0 {
            return fail("observation times start at 1".into());
        }
        if let Some(w) = times.windows(2).find(|w| w[0] >= w[1]) {
            return fail(format!("times not strictly increasing ({} then {})", w[0], w[1]));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return fail("non-finite value".into());
        }
        Ok(FirmSeries {
            firm_id,
            times,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Copy of the series without the observation at `time`, if present.
    pub fn without_time(&self, time: usize) -> FirmSeries {
        let (times, values) = self
            .times
            .iter()
            .zip(&self.values)
            .filter(|(&t, _)| t != time)
            .map(|(&t, &v)| (t, v))
            .unzip();
        FirmSeries {
            firm_id: self.firm_id.clone(),
            times,
            values,
        }
    }
}

/// Degrees of freedom of each block's multivariate-T marginal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DfConvention {
    /// `a + |s|`.
    #[default]
    ShapePlusBlock,
    /// `a`, as in the textbook normal/inverse-gamma integral.
    Shape,
}

/// Multiplier `c` in the block scale matrix `c · (I + τ² 11ᵀ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScaleConvention {
    /// `c = a / b`.
    #[default]
    ShapeOverScale,
    /// `c = b / a`, as in the textbook normal/inverse-gamma integral.
    ScaleOverShape,
}

impl FromStr for DfConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shape-plus-block" => Ok(Self::ShapePlusBlock),
            "shape" => Ok(Self::Shape),
            o => Err(Error::Config(format!("unknown df convention `{o}` (shape-plus-block|shape)"))),
        }
    }
}

impl fmt::Display for DfConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ShapePlusBlock => "shape-plus-block",
            Self::Shape => "shape",
        })
    }
}

impl FromStr for ScaleConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shape-over-scale" => Ok(Self::ShapeOverScale),
            "scale-over-shape" => Ok(Self::ScaleOverShape),
            o => Err(Error::Config(format!(
                "unknown scale convention `{o}` (shape-over-scale|scale-over-shape)"
            ))),
        }
    }
}

impl fmt::Display for ScaleConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ShapeOverScale => "shape-over-scale",
            Self::ScaleOverShape => "scale-over-shape",
        })
    }
}

/// Prior settings for the screening model on the grid `{1, …, n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyper {
    /// Inverse-gamma inputs: `σ² ~ IG(a/2, b/2)`.
    pub a: f64,
    pub b: f64,
    /// Signal-to-noise prior variance ratio.
    pub tau2: f64,
    /// Dirichlet weights over `{0, …, n}`.
    pub alpha: Vec<f64>,
    pub df: DfConvention,
    pub scale: ScaleConvention,
}

impl Hyper {
    /// `a = b = 2`, `τ² = 10`, `α₀ = 0.8`, `α_n = 0.1`, `α_k = 0.1/(n − 1)`.
    pub fn defaults(n: usize) -> Result<Self> {
        Self::with_alpha_mass(n, 0.8, 0.1, 0.1)
    }

    /// Null mass `alpha0`, full-signal mass `alpha_n`, and `interior` spread
    /// evenly over `1..n`.
    pub fn with_alpha_mass(n: usize, alpha0: f64, alpha_n: f64, interior: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("changepoint grid needs n ≥ 2, got {n}")));
        }
        let mut alpha = vec![interior / (n - 1) as f64; n + 1];
        alpha[0] = alpha0;
        alpha[n] = alpha_n;
        let h = Hyper {
            a: 2.0,
            b: 2.0,
            tau2: 10.0,
            alpha,
            df: DfConvention::default(),
            scale: ScaleConvention::default(),
        };
        h.validate()?;
        Ok(h)
    }

    /// Grid length `n`.
    pub fn n(&self) -> usize {
        self.alpha.len().saturating_sub(1)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("b", self.b), ("tau2", self.tau2)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("`{name}` must be positive, got {v}")));
            }
        }
        if self.n() < 2 {
            return Err(Error::InvalidInput("α must cover {0, …, n} with n ≥ 2".into()));
        }
        if self.alpha.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidInput("α entries must be finite and ≥ 0".into()));
        }
        if self.alpha.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidInput("α must have positive total mass".into()));
        }
        Ok(())
    }
}
