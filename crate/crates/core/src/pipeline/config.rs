//! Flat `key = value` run configuration.
//!
//! Lines are `key = value`; `#` starts a comment. Command-line flags are
//! merged over the file before parsing, and the fully resolved map is echoed
//! into every run manifest so a run can be replayed from the manifest alone.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::changepoint::{DfConvention, Hyper, PosteriorSummary, ScaleConvention};
use crate::error::{Error, Result};
use crate::graph::{EdgeRule, Estimator, WindowSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PipelineKind {
    Contagion,
    Screen,
    SimulateContagion,
    SimulateFirms,
}

impl FromStr for PipelineKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "contagion" => Ok(Self::Contagion),
            "screen" => Ok(Self::Screen),
            "simulate-contagion" => Ok(Self::SimulateContagion),
            "simulate-firms" => Ok(Self::SimulateFirms),
            o => Err(Error::Config(format!(
                "unknown pipeline `{o}` (contagion|screen|simulate-contagion|simulate-firms)"
            ))),
        }
    }
}

impl fmt::Display for PipelineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Contagion => "contagion",
            Self::Screen => "screen",
            Self::SimulateContagion => "simulate-contagion",
            Self::SimulateFirms => "simulate-firms",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContagionPreset {
    Identity,
    BlockSparse,
    RegimeFlip,
}

impl FromStr for ContagionPreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Self::Identity),
            "block-sparse" => Ok(Self::BlockSparse),
            "regime-flip" => Ok(Self::RegimeFlip),
            o => Err(Error::Config(format!(
                "unknown simulation preset `{o}` (identity|block-sparse|regime-flip)"
            ))),
        }
    }
}

impl fmt::Display for ContagionPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Identity => "identity",
            Self::BlockSparse => "block-sparse",
            Self::RegimeFlip => "regime-flip",
        })
    }
}

/// Everything a run needs. Field defaults follow [`RunConfig::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub pipeline: PipelineKind,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub parallel: bool,

    pub returns: Option<PathBuf>,
    pub factors: Option<PathBuf>,
    pub window: WindowSpec,
    pub estimator: String,
    pub lambda: f64,
    pub edge_rule: EdgeRule,
    pub intercept: bool,

    pub firms: Option<PathBuf>,
    pub iters: usize,
    pub burn_in: usize,
    pub cutoff: f64,
    pub min_obs: usize,
    pub a: f64,
    pub b: f64,
    pub tau2: f64,
    pub alpha0: f64,
    pub alpha_n: f64,
    pub alpha_interior: f64,
    /// Use the contiguous grid `1..=grid_n` instead of the cohort's year union.
    pub grid_n: Option<usize>,
    pub df_convention: DfConvention,
    pub scale_convention: ScaleConvention,
    pub summary: PosteriorSummary,

    pub sim_preset: ContagionPreset,
    pub sim_p: usize,
    pub sim_t: usize,
    pub sim_boundary: Option<usize>,
    pub sim_edge_strength: f64,
    pub sim_factors: bool,

    pub sim_firms: usize,
    pub sim_years: usize,
    pub sim_first_year: i32,
    pub sim_changepoint_fraction: f64,
    pub sim_jump: f64,
    pub sim_noise_sd: f64,
    /// Observations kept per firm; 0 means use `sim_missing_rate`.
    pub sim_observations: usize,
    pub sim_missing_rate: f64,
    pub sim_min_epoch: usize,
}

const KEYS: &[&str] = &[
    "pipeline", "out", "seed", "parallel", "returns", "factors", "window", "step", "estimator",
    "lambda", "edge_rule", "intercept", "firms", "iters", "burn_in", "cutoff", "min_obs", "a", "b",
    "tau2", "alpha0", "alpha_n", "alpha_interior", "grid_n", "df_convention", "scale_convention",
    "summary", "sim_preset", "sim_p", "sim_t", "sim_boundary", "sim_edge_strength", "sim_factors",
    "sim_firms", "sim_years", "sim_first_year", "sim_changepoint_fraction", "sim_jump",
    "sim_noise_sd", "sim_observations", "sim_missing_rate", "sim_min_epoch",
];

impl RunConfig {
    pub fn new(pipeline: PipelineKind, out_dir: impl Into<PathBuf>) -> Self {
        RunConfig {
            pipeline,
            out_dir: out_dir.into(),
            seed: 0,
            parallel: true,
            returns: None,
            factors: None,
            window: WindowSpec::default(),
            estimator: "bic-subset".into(),
            lambda: 0.1,
            edge_rule: EdgeRule::And,
            intercept: true,
            firms: None,
            iters: 3000,
            burn_in: 500,
            cutoff: 0.95,
            min_obs: 20,
            a: 2.0,
            b: 2.0,
            tau2: 10.0,
            alpha0: 0.8,
            alpha_n: 0.1,
            alpha_interior: 0.1,
            grid_n: None,
            df_convention: DfConvention::default(),
            scale_convention: ScaleConvention::default(),
            summary: PosteriorSummary::Frequencies,
            sim_preset: ContagionPreset::RegimeFlip,
            sim_p: 10,
            sim_t: 1250,
            sim_boundary: None,
            sim_edge_strength: 0.4,
            sim_factors: false,
            sim_firms: 200,
            sim_years: 30,
            sim_first_year: 1979,
            sim_changepoint_fraction: 0.1,
            sim_jump: 6.0,
            sim_noise_sd: 1.0,
            sim_observations: 25,
            sim_missing_rate: 0.0,
            sim_min_epoch: 2,
        }
    }

    /// Builds a config from resolved key/value pairs. `pipeline` and `out` are required.
    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self> {
        if let Some(k) = pairs.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(Error::Config(format!("unknown key `{k}`")));
        }
        let get = |k: &str| pairs.get(k).map(String::as_str);
        let pipeline: PipelineKind = get("pipeline")
            .ok_or_else(|| Error::Config("missing `pipeline`".into()))?
            .parse()?;
        let out = get("out").ok_or_else(|| Error::Config("missing `out`".into()))?;
        let mut c = RunConfig::new(pipeline, out);

        fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::Config(format!("bad value `{v}` for `{key}`")))
        }
        macro_rules! set {
            ($key:literal => $field:expr) => {
                if let Some(v) = get($key) {
                    $field = parse($key, v)?;
                }
            };
        }
        macro_rules! set_opt {
            ($key:literal => $field:expr) => {
                if let Some(v) = get($key) {
                    $field = if v.is_empty() { None } else { Some(parse($key, v)?) };
                }
            };
        }
        set!("seed" => c.seed);
        set!("parallel" => c.parallel);
        set_opt!("returns" => c.returns);
        set_opt!("factors" => c.factors);
        set!("window" => c.window.length);
        set!("step" => c.window.step);
        set!("estimator" => c.estimator);
        set!("lambda" => c.lambda);
        if let Some(v) = get("edge_rule") {
            c.edge_rule = v.parse()?;
        }
        set!("intercept" => c.intercept);
        set_opt!("firms" => c.firms);
        set!("iters" => c.iters);
        set!("burn_in" => c.burn_in);
        set!("cutoff" => c.cutoff);
        set!("min_obs" => c.min_obs);
        set!("a" => c.a);
        set!("b" => c.b);
        set!("tau2" => c.tau2);
        set!("alpha0" => c.alpha0);
        set!("alpha_n" => c.alpha_n);
        set!("alpha_interior" => c.alpha_interior);
        set_opt!("grid_n" => c.grid_n);
        if let Some(v) = get("df_convention") {
            c.df_convention = v.parse()?;
        }
        if let Some(v) = get("scale_convention") {
            c.scale_convention = v.parse()?;
        }
        if let Some(v) = get("summary") {
            c.summary = match v {
                "frequencies" => PosteriorSummary::Frequencies,
                "rao-blackwell" => PosteriorSummary::RaoBlackwell,
                o => return Err(Error::Config(format!("unknown summary `{o}` (frequencies|rao-blackwell)"))),
            };
        }
        if let Some(v) = get("sim_preset") {
            c.sim_preset = v.parse()?;
        }
        set!("sim_p" => c.sim_p);
        set!("sim_t" => c.sim_t);
        set_opt!("sim_boundary" => c.sim_boundary);
        set!("sim_edge_strength" => c.sim_edge_strength);
        set!("sim_factors" => c.sim_factors);
        set!("sim_firms" => c.sim_firms);
        set!("sim_years" => c.sim_years);
        set!("sim_first_year" => c.sim_first_year);
        set!("sim_changepoint_fraction" => c.sim_changepoint_fraction);
        set!("sim_jump" => c.sim_jump);
        set!("sim_noise_sd" => c.sim_noise_sd);
        set!("sim_observations" => c.sim_observations);
        set!("sim_missing_rate" => c.sim_missing_rate);
        set!("sim_min_epoch" => c.sim_min_epoch);
        Ok(c)
    }

    /// Every setting as key/value pairs; `from_pairs(to_pairs())` is the identity.
    pub fn to_pairs(&self) -> BTreeMap<String, String> {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let opt = |v: Option<usize>| v.map(|v| v.to_string()).unwrap_or_default();
        let summary = match self.summary {
            PosteriorSummary::Frequencies => "frequencies",
            PosteriorSummary::RaoBlackwell => "rao-blackwell",
        };
        [
            ("pipeline", self.pipeline.to_string()),
            ("out", self.out_dir.display().to_string()),
            ("seed", self.seed.to_string()),
            ("parallel", self.parallel.to_string()),
            ("returns", path(&self.returns)),
            ("factors", path(&self.factors)),
            ("window", self.window.length.to_string()),
            ("step", self.window.step.to_string()),
            ("estimator", self.estimator.clone()),
            ("lambda", self.lambda.to_string()),
            ("edge_rule", self.edge_rule.to_string()),
            ("intercept", self.intercept.to_string()),
            ("firms", path(&self.firms)),
            ("iters", self.iters.to_string()),
            ("burn_in", self.burn_in.to_string()),
            ("cutoff", self.cutoff.to_string()),
            ("min_obs", self.min_obs.to_string()),
            ("a", self.a.to_string()),
            ("b", self.b.to_string()),
            ("tau2", self.tau2.to_string()),
            ("alpha0", self.alpha0.to_string()),
            ("alpha_n", self.alpha_n.to_string()),
            ("alpha_interior", self.alpha_interior.to_string()),
            ("grid_n", opt(self.grid_n)),
            ("df_convention", self.df_convention.to_string()),
            ("scale_convention", self.scale_convention.to_string()),
            ("summary", summary.to_string()),
            ("sim_preset", self.sim_preset.to_string()),
            ("sim_p", self.sim_p.to_string()),
            ("sim_t", self.sim_t.to_string()),
            ("sim_boundary", opt(self.sim_boundary)),
            ("sim_edge_strength", self.sim_edge_strength.to_string()),
            ("sim_factors", self.sim_factors.to_string()),
            ("sim_firms", self.sim_firms.to_string()),
            ("sim_years", self.sim_years.to_string()),
            ("sim_first_year", self.sim_first_year.to_string()),
            ("sim_changepoint_fraction", self.sim_changepoint_fraction.to_string()),
            ("sim_jump", self.sim_jump.to_string()),
            ("sim_noise_sd", self.sim_noise_sd.to_string()),
            ("sim_observations", self.sim_observations.to_string()),
            ("sim_missing_rate", self.sim_missing_rate.to_string()),
            ("sim_min_epoch", self.sim_min_epoch.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    pub fn estimator(&self) -> Result<Estimator> {
        Estimator::parse(&self.estimator, self.lambda)
    }

    /// Screening hyperparameters on a grid of `n` years.
    pub fn hyper(&self, n: usize) -> Result<Hyper> {
        let mut h = Hyper::with_alpha_mass(n, self.alpha0, self.alpha_n, self.alpha_interior)?;
        h.a = self.a;
        h.b = self.b;
        h.tau2 = self.tau2;
        h.df = self.df_convention;
        h.scale = self.scale_convention;
        h.validate()?;
        Ok(h)
    }

    /// Checks ranges and that every input the pipeline reads exists.
    pub fn validate(&self) -> Result<()> {
        let need = |p: &Option<PathBuf>, key: &str| -> Result<()> {
            match p {
                None => Err(Error::Config(format!("`{key}` is required for {}", self.pipeline))),
                Some(p) if !p.exists() => Err(Error::Config(format!("`{key}`: {} does not exist", p.display()))),
                Some(_) => Ok(()),
            }
        };
        match self.pipeline {
            PipelineKind::Contagion => {
                need(&self.returns, "returns")?;
                if self.factors.is_some() {
                    need(&self.factors, "factors")?;
                }
                if self.window.step == 0 {
                    return Err(Error::Config("`step` must be ≥ 1".into()));
                }
                let est = self.estimator()?;
                if matches!(est, Estimator::Ridge { .. } | Estimator::Lasso { .. }) && !(self.lambda >= 0.0) {
                    return Err(Error::Config("`lambda` must be ≥ 0".into()));
                }
            }
            PipelineKind::Screen => {
                need(&self.firms, "firms")?;
                if self.iters <= self.burn_in {
                    return Err(Error::Config("`iters` must exceed `burn_in`".into()));
                }
                if !(self.cutoff > 0.0 && self.cutoff <= 1.0) {
                    return Err(Error::Config("`cutoff` must lie in (0, 1]".into()));
                }
                if self.min_obs == 0 {
                    return Err(Error::Config("`min_obs` must be ≥ 1".into()));
                }
                self.hyper(self.grid_n.unwrap_or(2).max(2))?;
            }
            PipelineKind::SimulateContagion => {
                if self.sim_p < 2 || self.sim_t == 0 {
                    return Err(Error::Config("`sim_p` must be ≥ 2 and `sim_t` ≥ 1".into()));
                }
                if !(self.sim_edge_strength.abs() < 0.5) {
                    return Err(Error::Config("`sim_edge_strength` must lie in (−0.5, 0.5)".into()));
                }
            }
            PipelineKind::SimulateFirms => {
                for (k, v) in [
                    ("sim_changepoint_fraction", self.sim_changepoint_fraction),
                    ("sim_missing_rate", self.sim_missing_rate),
                ] {
                    if !(0.0..=1.0).contains(&v) {
                        return Err(Error::Config(format!("`{k}` must lie in [0, 1]")));
                    }
                }
                if self.sim_years < 2 || self.sim_firms == 0 {
                    return Err(Error::Config("`sim_years` must be ≥ 2 and `sim_firms` ≥ 1".into()));
                }
                if !(self.sim_noise_sd > 0.0) {
                    return Err(Error::Config("`sim_noise_sd` must be positive".into()));
                }
                if self.sim_observations > self.sim_years {
                    return Err(Error::Config("`sim_observations` exceeds `sim_years`".into()));
                }
            }
        }
        Ok(())
    }
}

/// Parses `key = value` lines.
pub fn parse_kv(text: &str, origin: &Path) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: origin.to_path_buf(),
            line: i + 1,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

pub fn read_kv_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_kv(&text, path)
}
