//! Screens a simulated cohort for single level shifts and prints the flagged
//! firms next to the planted truth.
//!
//! cargo run --example changepoint_screen

use partition_core::changepoint::{filter_cohort, gibbs_screen, screen, GibbsOptions, Hyper};
use partition_core::pipeline::simulate::{simulate_firms, FirmSimSpec};

fn main() -> partition_core::Result<()> {
    let spec = FirmSimSpec::default();
    let cohort = simulate_firms(&spec, 2024)?;
    let kept = filter_cohort(cohort.firms, 20)?;
    println!("{} firms kept, {} dropped for short histories", kept.retained.len(), kept.dropped);

    let hyper = Hyper::defaults(spec.years)?;
    let result = gibbs_screen(&kept.retained, &hyper, &GibbsOptions { seed: 2024, ..GibbsOptions::default() })?;

    let w = &result.omega_mean;
    println!("posterior mean omega: null {:.3}, constant {:.3}, interior {:.3}", w[0], w[spec.years], 1.0 - w[0] - w[spec.years]);

    let hits = screen(&result.posteriors, 0.95)?;
    println!("{:>4} {:>6} {:>6} {:>5} {:>5}", "rank", "firm", "PM", "year", "truth");
    for h in &hits {
        let truth = cohort.truth.iter().find(|t| t.firm_id == h.firm_id).map_or(0, |t| t.gamma);
        println!("{:>4} {:>6} {:>6.3} {:>5} {:>5}", h.rank, h.firm_id, h.pm, h.changepoint, truth);
    }
    let planted = cohort.truth.iter().filter(|t| t.gamma > 0).count();
    println!("{} flagged, {planted} planted", hits.len());
    Ok(())
}
