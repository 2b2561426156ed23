//! File-based workflow: simulate inputs, run both pipelines, then replay one
//! run from its manifest. Everything lands in a temporary directory unless a
//! path is given.
//!
//! cargo run --example simulate_and_run [-- OUT_DIR]

use std::path::PathBuf;

use partition_core::pipeline::{config_from_manifest, run, PipelineKind, RunConfig};

fn main() -> partition_core::Result<()> {
    let root: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("partition-demo"));

    let mut sim = RunConfig::new(PipelineKind::SimulateContagion, root.join("sim-returns"));
    sim.seed = 1;
    sim.sim_factors = true;
    run(&sim)?;

    let mut graphs = RunConfig::new(PipelineKind::Contagion, root.join("contagion"));
    graphs.returns = Some(sim.out_dir.join("returns.csv"));
    graphs.factors = Some(sim.out_dir.join("factors.csv"));
    let summary = run(&graphs)?;
    println!("contagion: {:?} in {}", summary.outputs, summary.out_dir.display());

    let mut firms = RunConfig::new(PipelineKind::SimulateFirms, root.join("sim-firms"));
    firms.seed = 1;
    run(&firms)?;

    let mut scr = RunConfig::new(PipelineKind::Screen, root.join("screen"));
    scr.firms = Some(firms.out_dir.join("firms.csv"));
    scr.seed = 1;
    let summary = run(&scr)?;
    println!("screen: {} firms flagged, outputs {:?}", summary.notes["flagged"], summary.outputs);

    let mut replay = config_from_manifest(&scr.out_dir.join("manifest.json"))?;
    replay.out_dir = root.join("screen-replay");
    run(&replay)?;
    let same = std::fs::read(scr.out_dir.join("posteriors.csv")).ok()
        == std::fs::read(replay.out_dir.join("posteriors.csv")).ok();
    println!("replay identical: {same}");
    Ok(())
}
