//! Synthetic data with known ground truth for both pipelines.

use chrono::{Datelike, NaiveDate, Weekday};
use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::changepoint::FirmSeries;
use crate::error::{Error, Result};
use crate::factor::FactorPanel;
use crate::graph::Adjacency;
use crate::panel::Panel;
use crate::rng::{stream, TAG_SIM_FIRMS, TAG_SIM_PANEL};

/// Default labels for a ten-column panel: nine equity indices and EUR/USD.
pub const EUROPE_LABELS: [&str; 10] = ["DEU", "GBR", "ITA", "ESP", "FRA", "CHE", "SWE", "BEL", "NLD", "EURUSD"];

pub fn default_labels(p: usize) -> Vec<String> {
    if p == EUROPE_LABELS.len() {
        EUROPE_LABELS.iter().map(|s| s.to_string()).collect()
    } else {
        (0..p).map(|j| format!("S{j}")).collect()
    }
}

/// A stretch of the panel drawn from one precision matrix, starting at row `start`.
#[derive(Debug, Clone, PartialEq)]
pub struct Regime {
    pub start: usize,
    pub precision: DMatrix<f64>,
}

/// Four-factor structure planted on top of the graphical noise.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPlant {
    /// Per column: loadings on `x_us`, `x_eu`, `δ_us`, raw `δ_eu`.
    pub loadings: Vec<[f64; 4]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContagionSpec {
    pub labels: Vec<String>,
    pub t: usize,
    /// Ordered by `start`; the first starts at 0.
    pub regimes: Vec<Regime>,
    pub first_date: NaiveDate,
    pub factors: Option<FactorPlant>,
}

fn chain_precision(p: usize, edges: &[(usize, usize, f64)]) -> DMatrix<f64> {
    let mut omega = DMatrix::identity(p, p);
    for &(i, j, w) in edges {
        omega[(i, j)] = w;
        omega[(j, i)] = w;
    }
    omega
}

impl ContagionSpec {
    pub fn identity(p: usize, t: usize) -> Self {
        Self::single(p, t, DMatrix::identity(p, p))
    }

    fn single(p: usize, t: usize, precision: DMatrix<f64>) -> Self {
        ContagionSpec {
            labels: default_labels(p),
            t,
            regimes: vec![Regime { start: 0, precision }],
            first_date: NaiveDate::from_ymd_opt(2006, 1, 2).unwrap(),
            factors: None,
        }
    }

    /// Two blocks (first and second half of the nodes), each a chain with
    /// precision off-diagonals `−strength`.
    pub fn block_sparse(p: usize, t: usize, strength: f64) -> Self {
        Self::single(p, t, chain_precision(p, &block_chain_edges(p, strength)))
    }

    /// Edge `(0, 2)` (`(0, 1)` when `p < 3`) has precision `−strength` before
    /// `boundary` and `+strength` after; a chain over nodes 3.. plus `(1, 3)`
    /// is shared by both regimes.
    pub fn regime_flip(p: usize, t: usize, boundary: usize, strength: f64) -> Self {
        let flip = (0, 2.min(p - 1));
        let mut shared = Vec::new();
        if p > 3 {
            shared.push((1, 3, -strength));
            for i in 3..p - 1 {
                shared.push((i, i + 1, -strength));
            }
        }
        let mut a = shared.clone();
        a.push((flip.0, flip.1, -strength));
        let mut b = shared;
        b.push((flip.0, flip.1, strength));
        let mut spec = Self::single(p, t, chain_precision(p, &a));
        spec.regimes.push(Regime {
            start: boundary,
            precision: chain_precision(p, &b),
        });
        spec
    }

    pub fn with_factors(mut self) -> Self {
        let p = self.labels.len();
        self.factors = Some(FactorPlant {
            loadings: (0..p)
                .map(|j| [0.6 + 0.05 * j as f64, 0.8, -0.3, 0.1 * j as f64])
                .collect(),
        });
        self
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.labels.len();
        if self.regimes.is_empty() || self.regimes[0].start != 0 {
            return Err(Error::InvalidInput("first regime must start at row 0".into()));
        }
        if self.regimes.windows(2).any(|w| w[0].start >= w[1].start) || self.regimes.last().unwrap().start >= self.t {
            return Err(Error::InvalidInput("regime starts must increase and lie within the panel".into()));
        }
        for (r, reg) in self.regimes.iter().enumerate() {
            let m = &reg.precision;
            if m.shape() != (p, p) || (m - m.transpose()).abs().max() > 1e-12 || m.clone().cholesky().is_none() {
                return Err(Error::InvalidInput(format!(
                    "regime {r}: precision must be a symmetric positive-definite {p}×{p} matrix"
                )));
            }
        }
        if let Some(f) = &self.factors {
            if f.loadings.len() != p {
                return Err(Error::InvalidInput("one loading row per column required".into()));
            }
        }
        Ok(())
    }
}

pub fn block_chain_edges(p: usize, strength: f64) -> Vec<(usize, usize, f64)> {
    let half = p / 2;
    (0..p.saturating_sub(1))
        .filter(|&i| i + 1 != half)
        .map(|i| (i, i + 1, -strength))
        .collect()
}

/// Known structure of one regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthSegment {
    pub start: usize,
    /// Exclusive.
    pub end: usize,
    pub first_date: NaiveDate,
    pub labels: Vec<String>,
    /// Row-major 0/1.
    pub adjacency: Vec<u8>,
    /// Row-major.
    pub precision: Vec<f64>,
}

impl TruthSegment {
    pub fn adjacency(&self) -> Adjacency {
        let p = self.labels.len();
        let mut adj = Adjacency::empty(p);
        for i in 0..p {
            for j in 0..p {
                if self.adjacency[i * p + j] == 1 {
                    adj.set_edge(i, j, true);
                }
            }
        }
        adj
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedPanel {
    pub returns: Panel,
    pub factors: Option<FactorPanel>,
    pub truth: Vec<TruthSegment>,
}

/// Weekdays starting at `first` (moved forward to a weekday if needed).
pub fn business_days(first: NaiveDate, count: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(count);
    let mut d = first;
    while out.len() < count {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d.succ_opt().expect("date in range");
    }
    out
}

/// Gaussian panel, regime by regime, plus optional four-factor structure.
pub fn simulate_contagion(spec: &ContagionSpec, seed: u64) -> Result<SimulatedPanel> {
    spec.validate()?;
    let p = spec.labels.len();
    let mut rng = stream(seed, &[TAG_SIM_PANEL]);
    let dates = business_days(spec.first_date, spec.t);
    let mut columns = vec![Vec::with_capacity(spec.t); p];
    let mut truth = Vec::new();
    for (r, reg) in spec.regimes.iter().enumerate() {
        let end = spec.regimes.get(r + 1).map_or(spec.t, |n| n.start);
        let sigma = reg
            .precision
            .clone()
            .cholesky()
            .expect("validated")
            .inverse();
        let l = sigma
            .cholesky()
            .ok_or_else(|| Error::Numerical("covariance not positive definite".into()))?
            .l();
        for _ in reg.start..end {
            let z = DVector::from_fn(p, |_, _| rng.sample::<f64, _>(StandardNormal));
            let x = &l * z;
            for (c, v) in columns.iter_mut().zip(x.iter()) {
                c.push(*v);
            }
        }
        truth.push(TruthSegment {
            start: reg.start,
            end,
            first_date: dates[reg.start],
            labels: spec.labels.clone(),
            adjacency: (0..p * p)
                .map(|ij| {
                    let (i, j) = (ij / p, ij % p);
                    u8::from(i != j && reg.precision[(i, j)] != 0.0)
                })
                .collect(),
            precision: (0..p * p).map(|ij| reg.precision[(ij / p, ij % p)]).collect(),
        });
    }

    let factors = match &spec.factors {
        None => None,
        Some(plant) => {
            let mut draw = || -> f64 { rng.sample(StandardNormal) };
            let (mut x_us, mut x_eu, mut d_us, mut d_eu) = (vec![], vec![], vec![], vec![]);
            for _ in 0..spec.t {
                let a = draw();
                let b = 0.6 * a + 0.8 * draw();
                let c = draw();
                let d = 0.7 * c + 0.7 * draw();
                x_us.push(a);
                x_eu.push(b);
                d_us.push(c);
                d_eu.push(d);
            }
            for (col, load) in columns.iter_mut().zip(&plant.loadings) {
                for t in 0..spec.t {
                    col[t] += load[0] * x_us[t] + load[1] * x_eu[t] + load[2] * d_us[t] + load[3] * d_eu[t];
                }
            }
            Some(FactorPanel::new(dates.clone(), x_us, x_eu, d_us, d_eu)?)
        }
    };

    Ok(SimulatedPanel {
        returns: Panel::new(dates, spec.labels.clone(), columns)?,
        factors,
        truth,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Missingness {
    /// Drop each year independently with this probability.
    Rate(f64),
    /// Keep exactly this many years per firm.
    Keep(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FirmSimSpec {
    pub firms: usize,
    pub years: usize,
    pub changepoint_fraction: f64,
    /// Fraction of firms with a constant nonzero level (`γ = n`).
    pub constant_fraction: f64,
    /// Absolute size of the level shift; its sign is random.
    pub jump: f64,
    pub noise_sd: f64,
    pub missing: Missingness,
    /// Each epoch spans at least this many grid years.
    pub min_epoch: usize,
    /// Never drop years `k` and `k + 1` around a firm's changepoint `k`, so the
    /// split stays identifiable to the year.
    pub protect_changepoint: bool,
}

impl Default for FirmSimSpec {
    fn default() -> Self {
        FirmSimSpec {
            firms: 200,
            years: 30,
            changepoint_fraction: 0.1,
            constant_fraction: 0.0,
            jump: 6.0,
            noise_sd: 1.0,
            missing: Missingness::Keep(25),
            min_epoch: 2,
            protect_changepoint: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirmTruth {
    pub firm_id: String,
    /// 0 null, `1..n` changepoint after that year, `n` constant level.
    pub gamma: usize,
    pub shift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedCohort {
    pub firms: Vec<FirmSeries>,
    pub truth: Vec<FirmTruth>,
}

impl FirmSimSpec {
    pub fn validate(&self) -> Result<()> {
        let frac_ok = |v: f64| (0.0..=1.0).contains(&v);
        if self.firms == 0 || self.years < 2 {
            return Err(Error::InvalidInput("need ≥ 1 firm and ≥ 2 years".into()));
        }
        if !frac_ok(self.changepoint_fraction) || !frac_ok(self.constant_fraction)
            || self.changepoint_fraction + self.constant_fraction > 1.0
        {
            return Err(Error::InvalidInput("firm-type fractions must lie in [0, 1] and sum to ≤ 1".into()));
        }
        if !(self.noise_sd > 0.0) || !self.jump.is_finite() {
            return Err(Error::InvalidInput("noise_sd must be positive and jump finite".into()));
        }
        match self.missing {
            Missingness::Rate(r) if !frac_ok(r) => {
                return Err(Error::InvalidInput("missing rate must lie in [0, 1]".into()))
            }
            Missingness::Keep(m) if m == 0 || m > self.years => {
                return Err(Error::InvalidInput(format!("cannot keep {m} of {} years", self.years)))
            }
            _ => {}
        }
        if self.changepoint_fraction > 0.0 && 2 * self.min_epoch.max(1) > self.years {
            return Err(Error::InvalidInput("min_epoch too long for the grid".into()));
        }
        Ok(())
    }
}

/// Draws a cohort from the piecewise-constant model on the grid `1..=years`.
pub fn simulate_firms(spec: &FirmSimSpec, seed: u64) -> Result<SimulatedCohort> {
    spec.validate()?;
    let n = spec.years;
    let n_jump = (spec.changepoint_fraction * spec.firms as f64).round() as usize;
    let n_const = ((spec.constant_fraction * spec.firms as f64).round() as usize).min(spec.firms - n_jump);
    let mut assign = stream(seed, &[TAG_SIM_FIRMS, u64::MAX]);
    let picked = sample(&mut assign, spec.firms, n_jump + n_const).into_vec();
    let mut kind = vec![0u8; spec.firms];
    for (m, &i) in picked.iter().enumerate() {
        kind[i] = if m < n_jump { 1 } else { 2 };
    }

    let lo = spec.min_epoch.max(1);
    let mut firms = Vec::with_capacity(spec.firms);
    let mut truth = Vec::with_capacity(spec.firms);
    for (i, &kind) in kind.iter().enumerate() {
        let mut rng = stream(seed, &[TAG_SIM_FIRMS, i as u64]);
        let firm_id = format!("F{i:04}");
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let shift = sign * spec.jump;
        let (gamma, level): (usize, Box<dyn Fn(usize) -> f64>) = match kind {
            1 => {
                let k = rng.random_range(lo..=n - lo);
                (k, Box::new(move |t| if t <= k { 0.0 } else { shift }))
            }
            2 => (n, Box::new(move |_| shift)),
            _ => (0, Box::new(|_| 0.0)),
        };
        let protected: Vec<usize> = if kind == 1 && spec.protect_changepoint {
            vec![gamma, gamma + 1]
        } else {
            vec![]
        };
        let mut keep: Vec<usize> = match spec.missing {
            Missingness::Keep(m) => {
                let others: Vec<usize> = (1..=n).filter(|t| !protected.contains(t)).collect();
                let extra = m.saturating_sub(protected.len()).min(others.len());
                let mut kept: Vec<usize> = sample(&mut rng, others.len(), extra)
                    .into_iter()
                    .map(|j| others[j])
                    .collect();
                kept.extend(&protected);
                kept
            }
            Missingness::Rate(r) => {
                let mut kept: Vec<usize> = (1..=n)
                    .filter(|t| protected.contains(t) || rng.random::<f64>() >= r)
                    .collect();
                if kept.is_empty() {
                    kept.push(rng.random_range(1..=n));
                }
                kept
            }
        };
        keep.sort_unstable();
        let values = keep
            .iter()
            .map(|&t| level(t) + spec.noise_sd * rng.sample::<f64, _>(StandardNormal))
            .collect();
        firms.push(FirmSeries::new(firm_id.clone(), keep, values)?);
        truth.push(FirmTruth {
            firm_id,
            gamma,
            shift: if gamma == 0 { 0.0 } else { shift },
        });
    }
    Ok(SimulatedCohort { firms, truth })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn business_days_skip_weekends() {
        let d = business_days(NaiveDate::from_ymd_opt(2010, 5, 7).unwrap(), 3);
        assert_eq!(
            d,
            vec![
                NaiveDate::from_ymd_opt(2010, 5, 7).unwrap(),
                NaiveDate::from_ymd_opt(2010, 5, 10).unwrap(),
                NaiveDate::from_ymd_opt(2010, 5, 11).unwrap(),
            ]
        );
    }

    #[test]
    fn presets_are_positive_definite() {
        for spec in [
            ContagionSpec::identity(10, 200),
            ContagionSpec::block_sparse(10, 200, 0.45),
            ContagionSpec::regime_flip(10, 200, 100, 0.45),
            ContagionSpec::regime_flip(3, 200, 100, 0.45),
        ] {
            spec.validate().unwrap();
        }
    }

    #[test]
    fn rejects_indefinite_precision() {
        let mut spec = ContagionSpec::identity(3, 20);
        spec.regimes[0].precision[(0, 1)] = 2.0;
        spec.regimes[0].precision[(1, 0)] = 2.0;
        assert!(simulate_contagion(&spec, 1).is_err());
    }

    #[test]
    fn no_changepoints_means_all_null() {
        let spec = FirmSimSpec {
            firms: 30,
            changepoint_fraction: 0.0,
            ..Default::default()
        };
        let c = simulate_firms(&spec, 3).unwrap();
        assert!(c.truth.iter().all(|t| t.gamma == 0));
        assert!(c.firms.iter().all(|f| f.len() == 25));
    }

    #[test]
    fn changepoint_neighbours_are_observed() {
        let spec = FirmSimSpec {
            firms: 50,
            changepoint_fraction: 0.5,
            missing: Missingness::Keep(10),
            ..Default::default()
        };
        let c = simulate_firms(&spec, 9).unwrap();
        for (f, t) in c.firms.iter().zip(&c.truth) {
            assert_eq!(f.len(), 10);
            if t.gamma > 0 {
                assert!(f.times.contains(&t.gamma) && f.times.contains(&(t.gamma + 1)));
            }
        }
        assert_eq!(c.truth.iter().filter(|t| t.gamma > 0).count(), 25);
    }
}
