use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use partition_core::pipeline::{config_from_manifest, read_kv_file, run, RunConfig};
use partition_core::Result;

/// Rolling conditional-independence graphs and Bayesian changepoint screening.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// `key = value` configuration file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Any configuration key, e.g. `--set tau2=5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Rolling-window graphs from a return panel (optionally factor-adjusted).
    Contagion {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        returns: Option<PathBuf>,
        #[arg(long)]
        factors: Option<PathBuf>,
        /// Window length in rows [default: 150].
        #[arg(long)]
        window: Option<usize>,
        /// Rows between window starts [default: 5].
        #[arg(long)]
        step: Option<usize>,
        /// bic-subset | ols | ridge | lasso [default: bic-subset].
        #[arg(long)]
        estimator: Option<String>,
        #[arg(long)]
        lambda: Option<f64>,
        /// and | or [default: and].
        #[arg(long)]
        edge_rule: Option<String>,
    },
    /// Changepoint screening of a firm-year panel.
    Screen {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        firms: Option<PathBuf>,
        /// Gibbs sweeps [default: 3000].
        #[arg(long)]
        iters: Option<usize>,
        /// Discarded sweeps [default: 500].
        #[arg(long)]
        burn_in: Option<usize>,
        /// Flag firms with PM at or above this [default: 0.95].
        #[arg(long)]
        cutoff: Option<f64>,
        /// Minimum observations per firm [default: 20].
        #[arg(long)]
        min_obs: Option<usize>,
    },
    /// Writes a synthetic return panel with known graphs.
    SimulateContagion {
        #[command(flatten)]
        common: Common,
    },
    /// Writes a synthetic firm-year panel with known changepoints.
    SimulateFirms {
        #[command(flatten)]
        common: Common,
    },
    /// Re-runs the configuration recorded in a manifest.
    Replay {
        manifest: PathBuf,
        /// Output directory (defaults to the recorded one).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn resolve(pipeline: &str, common: Common, extra: Vec<(&str, Option<String>)>) -> Result<RunConfig> {
    let mut pairs = match &common.config {
        Some(path) => read_kv_file(path)?,
        None => BTreeMap::new(),
    };
    pairs.insert("pipeline".into(), pipeline.into());
    for kv in &common.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| partition_core::Error::Config(format!("`--set {kv}` is not KEY=VALUE")))?;
        pairs.insert(k.trim().into(), v.trim().into());
    }
    let flags = [
        ("out", common.out.map(|p| p.display().to_string())),
        ("seed", common.seed.map(|s| s.to_string())),
    ];
    for (k, v) in flags.into_iter().chain(extra) {
        if let Some(v) = v {
            pairs.insert(k.into(), v);
        }
    }
    RunConfig::from_pairs(&pairs)
}

fn path(p: Option<PathBuf>) -> Option<String> {
    p.map(|p| p.display().to_string())
}

fn num<T: ToString>(v: Option<T>) -> Option<String> {
    v.map(|v| v.to_string())
}

fn config(command: Command) -> Result<RunConfig> {
    match command {
        Command::Contagion {
            common,
            returns,
            factors,
            window,
            step,
            estimator,
            lambda,
            edge_rule,
        } => resolve(
            "contagion",
            common,
            vec![
                ("returns", path(returns)),
                ("factors", path(factors)),
                ("window", num(window)),
                ("step", num(step)),
                ("estimator", estimator),
                ("lambda", num(lambda)),
                ("edge_rule", edge_rule),
            ],
        ),
        Command::Screen {
            common,
            firms,
            iters,
            burn_in,
            cutoff,
            min_obs,
        } => resolve(
            "screen",
            common,
            vec![
                ("firms", path(firms)),
                ("iters", num(iters)),
                ("burn_in", num(burn_in)),
                ("cutoff", num(cutoff)),
                ("min_obs", num(min_obs)),
            ],
        ),
        Command::SimulateContagion { common } => resolve("simulate-contagion", common, vec![]),
        Command::SimulateFirms { common } => resolve("simulate-firms", common, vec![]),
        Command::Replay { manifest, out } => {
            let mut c = config_from_manifest(&manifest)?;
            if let Some(out) = out {
                c.out_dir = out;
            }
            Ok(c)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match config(cli.command).and_then(|c| run(&c)) {
        Ok(summary) => {
            for f in &summary.outputs {
                println!("{}", summary.out_dir.join(f).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
