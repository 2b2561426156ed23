use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::{ContagionPreset, PipelineKind, RunConfig};
use super::io::{
    load_factor_panel, load_firm_csv, load_return_panel, write_factor_csv, write_firm_csv, write_panel_csv, YearGrid,
};
use super::simulate::{simulate_contagion, simulate_firms, ContagionSpec, FirmSimSpec, Missingness};
use crate::changepoint::{filter_cohort, gibbs_screen, screen, GibbsOptions};
use crate::error::{Error, Result};
use crate::factor::{build_residual_panel, FactorModelOptions};
use crate::graph::{
    coefficient_series, degree_series, neighborhood_size_series, rolling_graphs, write_series_csv,
    write_snapshots_jsonl, GraphOptions,
};
use crate::SCHEMA_VERSION;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub file: String,
    /// Set when the run failed after this file was written.
    pub partial: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub pipeline: String,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    pub status: String,
    pub outputs: Vec<OutputFile>,
    pub notes: BTreeMap<String, Value>,
    pub wall_time_s: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub outputs: Vec<String>,
    pub notes: BTreeMap<String, Value>,
}

struct Outputs<'a> {
    dir: &'a Path,
    files: Vec<String>,
    notes: BTreeMap<String, Value>,
}

impl Outputs<'_> {
    fn write(&mut self, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = BufWriter::new(file);
        body(&mut w)?;
        w.flush().map_err(|e| Error::io(&path, e))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn note(&mut self, key: &str, value: Value) {
        self.notes.insert(key.to_string(), value);
    }
}

/// Runs one pipeline and always leaves `manifest.json` in the output
/// directory, even when the run fails.
pub fn run(config: &RunConfig) -> Result<RunSummary> {
    let started = Instant::now();
    let dir = &config.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = Outputs {
        dir,
        files: Vec::new(),
        notes: BTreeMap::new(),
    };
    let result = config.validate().and_then(|_| match config.pipeline {
        PipelineKind::Contagion => run_contagion(config, &mut out),
        PipelineKind::Screen => run_screen(config, &mut out),
        PipelineKind::SimulateContagion => run_simulate_contagion(config, &mut out),
        PipelineKind::SimulateFirms => run_simulate_firms(config, &mut out),
    });
    let failed = result.is_err();
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        pipeline: config.pipeline.to_string(),
        seed: config.seed,
        config: config.to_pairs(),
        status: if failed { "error" } else { "ok" }.to_string(),
        outputs: out
            .files
            .iter()
            .map(|f| OutputFile {
                file: f.clone(),
                partial: failed,
            })
            .collect(),
        notes: out.notes.clone(),
        wall_time_s: started.elapsed().as_secs_f64(),
        error: result.as_ref().err().map(|e| e.to_string()),
    };
    let path = dir.join(MANIFEST);
    let text = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    result?;
    Ok(RunSummary {
        out_dir: dir.clone(),
        outputs: out.files,
        notes: out.notes,
    })
}

/// Rebuilds the configuration recorded in a manifest.
pub fn config_from_manifest(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let manifest: Manifest = serde_json::from_str(&text)?;
    RunConfig::from_pairs(&manifest.config)
}

fn run_contagion(c: &RunConfig, out: &mut Outputs) -> Result<()> {
    let returns = load_return_panel(c.returns.as_deref().expect("validated"))?;
    let panel = match &c.factors {
        Some(path) => {
            let factors = load_factor_panel(path)?;
            let (resid, fits) = build_residual_panel(&returns, &factors, FactorModelOptions { intercept: c.intercept })?;
            out.write("factor_fits.csv", |w| {
                let mut w = csv::Writer::from_writer(w);
                w.write_record([
                    "index_id", "intercept", "beta_us", "beta_eu", "gamma_us", "gamma_eu", "se_beta_us",
                    "se_beta_eu", "se_gamma_us", "se_gamma_eu", "schema_version",
                ])?;
                for f in &fits {
                    let mut row = vec![f.index_id.clone(), f.intercept.map(|v| v.to_string()).unwrap_or_default()];
                    row.extend(f.loadings().iter().chain(&f.standard_errors).map(|v| v.to_string()));
                    row.push(SCHEMA_VERSION.to_string());
                    w.write_record(row)?;
                }
                w.flush().map_err(|e| Error::io("factor_fits.csv", e))?;
                Ok(())
            })?;
            resid
        }
        None => returns,
    };
    let options = GraphOptions {
        estimator: c.estimator()?,
        edge_rule: c.edge_rule,
        parallel: c.parallel,
    };
    let snapshots = rolling_graphs(&panel, c.window, options)?;
    out.note("windows", json!(snapshots.len()));
    out.write("snapshots.jsonl", |w| write_snapshots_jsonl(w, &snapshots))?;

    let labels = panel.labels();
    let as_f64 = |v: Vec<usize>| v.into_iter().map(|x| x as f64).collect::<Vec<_>>();
    let degree = labels
        .iter()
        .map(|l| Ok((l.clone(), as_f64(degree_series(&snapshots, l)?))))
        .collect::<Result<Vec<_>>>()?;
    out.write("degree.csv", |w| write_series_csv(w, &snapshots, &degree))?;
    let sizes = labels
        .iter()
        .map(|l| Ok((l.clone(), as_f64(neighborhood_size_series(&snapshots, l)?))))
        .collect::<Result<Vec<_>>>()?;
    out.write("neighborhood_size.csv", |w| write_series_csv(w, &snapshots, &sizes))?;
    let mut coefs = Vec::new();
    for i in labels {
        for j in labels.iter().filter(|j| *j != i) {
            coefs.push((format!("{i}<-{j}"), coefficient_series(&snapshots, i, j)?));
        }
    }
    out.write("coefficients.csv", |w| write_series_csv(w, &snapshots, &coefs))
}

fn run_screen(c: &RunConfig, out: &mut Outputs) -> Result<()> {
    let raw = load_firm_csv(c.firms.as_deref().expect("validated"))?;
    let total = raw.len();
    let cohort = filter_cohort(raw, c.min_obs)?;
    out.note("firms_read", json!(total));
    out.note("firms_dropped_min_obs", json!(cohort.dropped));
    if cohort.retained.is_empty() {
        return Err(Error::InvalidInput(format!("no firm has at least {} observations", c.min_obs)));
    }
    let grid = match c.grid_n {
        Some(n) => {
            let first = cohort.retained.iter().map(|f| f.times[0]).min().expect("nonempty");
            YearGrid::contiguous(first, n)
        }
        None => YearGrid::from_firms(&cohort.retained),
    };
    out.note("grid_n", json!(grid.n()));
    let firms = grid.remap(&cohort.retained)?;
    let hyper = c.hyper(grid.n())?;
    let options = GibbsOptions {
        iters: c.iters,
        burn_in: c.burn_in,
        seed: c.seed,
        summary: c.summary,
        fixed_omega: None,
        parallel: c.parallel,
    };
    let result = gibbs_screen(&firms, &hyper, &options)?;
    let year_label = |k: usize| -> String {
        if k == 0 || k == grid.n() {
            String::new()
        } else {
            grid.year(k).to_string()
        }
    };

    out.write("posteriors.csv", |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["firm_id", "k", "year", "probability", "schema_version"])?;
        for p in &result.posteriors {
            for (k, prob) in p.probs.iter().enumerate() {
                w.write_record([
                    p.firm_id.clone(),
                    k.to_string(),
                    year_label(k),
                    prob.to_string(),
                    SCHEMA_VERSION.to_string(),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io("posteriors.csv", e))?;
        Ok(())
    })?;

    let hits = screen(&result.posteriors, c.cutoff)?;
    out.note("flagged", json!(hits.len()));
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "cutoff": c.cutoff,
        "grid_years": (1..=grid.n()).map(|k| grid.year(k)).collect::<Vec<_>>(),
        "flagged": hits.iter().map(|h| json!({
            "rank": h.rank,
            "firm_id": h.firm_id,
            "pm": h.pm,
            "argmax_year": grid.year(h.changepoint),
        })).collect::<Vec<_>>(),
    });
    out.write("report.json", |w| {
        serde_json::to_writer_pretty(&mut *w, &report)?;
        w.write_all(b"\n").map_err(|e| Error::io("report.json", e))
    })?;

    out.write("omega.csv", |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["k", "omega_mean", "schema_version"])?;
        for (k, v) in result.omega_mean.iter().enumerate() {
            w.write_record([k.to_string(), v.to_string(), SCHEMA_VERSION.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("omega.csv", e))?;
        Ok(())
    })
}

fn contagion_spec(c: &RunConfig) -> ContagionSpec {
    let spec = match c.sim_preset {
        ContagionPreset::Identity => ContagionSpec::identity(c.sim_p, c.sim_t),
        ContagionPreset::BlockSparse => ContagionSpec::block_sparse(c.sim_p, c.sim_t, c.sim_edge_strength),
        ContagionPreset::RegimeFlip => {
            ContagionSpec::regime_flip(c.sim_p, c.sim_t, c.sim_boundary.unwrap_or(c.sim_t / 2), c.sim_edge_strength)
        }
    };
    if c.sim_factors {
        spec.with_factors()
    } else {
        spec
    }
}

fn run_simulate_contagion(c: &RunConfig, out: &mut Outputs) -> Result<()> {
    let sim = simulate_contagion(&contagion_spec(c), c.seed)?;
    out.write("returns.csv", |w| write_panel_csv(w, &sim.returns))?;
    if let Some(f) = &sim.factors {
        out.write("factors.csv", |w| write_factor_csv(w, f))?;
    }
    out.write("truth.jsonl", |w| {
        for seg in &sim.truth {
            serde_json::to_writer(&mut *w, seg)?;
            w.write_all(b"\n").map_err(|e| Error::io("truth.jsonl", e))?;
        }
        Ok(())
    })
}

fn run_simulate_firms(c: &RunConfig, out: &mut Outputs) -> Result<()> {
    let spec = FirmSimSpec {
        firms: c.sim_firms,
        years: c.sim_years,
        changepoint_fraction: c.sim_changepoint_fraction,
        jump: c.sim_jump,
        noise_sd: c.sim_noise_sd,
        missing: if c.sim_observations == 0 {
            Missingness::Rate(c.sim_missing_rate)
        } else {
            Missingness::Keep(c.sim_observations)
        },
        min_epoch: c.sim_min_epoch,
        ..FirmSimSpec::default()
    };
    let cohort = simulate_firms(&spec, c.seed)?;
    let first = c.sim_first_year;
    if first < 0 {
        return Err(Error::Config("`sim_first_year` must be ≥ 0".into()));
    }
    let year_of = |t: usize| first as usize + t - 1;
    out.write("firms.csv", |w| write_firm_csv(w, &cohort.firms, year_of))?;
    out.write("truth.csv", |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["firm_id", "gamma", "changepoint_year", "shift", "schema_version"])?;
        for t in &cohort.truth {
            let year = if t.gamma == 0 || t.gamma == spec.years {
                String::new()
            } else {
                year_of(t.gamma).to_string()
            };
            w.write_record([
                t.firm_id.clone(),
                t.gamma.to_string(),
                year,
                t.shift.to_string(),
                SCHEMA_VERSION.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("truth.csv", e))?;
        Ok(())
    })
}
