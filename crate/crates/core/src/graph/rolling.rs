use rayon::prelude::*;

use super::{
    assemble_adjacency, empty_graph_test, reconstruct_covariance, select_neighborhood, GraphOptions,
    GraphSnapshot, WindowSpec,
};
use crate::error::{Error, Result};
use crate::panel::Panel;

/// Number of full windows: `⌊(T − length)/step⌋ + 1`, or 0 if `T < length`.
pub fn window_count(t: usize, spec: WindowSpec) -> usize {
    if t < spec.length || spec.step == 0 {
        0
    } else {
        (t - spec.length) / spec.step + 1
    }
}

/// Runs the full selection procedure on one window.
pub fn graph_snapshot(window: &Panel, window_index: usize, options: GraphOptions) -> Result<GraphSnapshot> {
    let p = window.n_cols();
    let neighborhoods = (0..p)
        .map(|i| select_neighborhood(window, i, options.estimator).map_err(|e| e.in_column(&window.labels()[i])))
        .collect::<Result<Vec<_>>>()?;
    let adjacency = assemble_adjacency(&neighborhoods, options.edge_rule)?;
    let cov = reconstruct_covariance(&neighborhoods, &adjacency)?;
    let empty_graph = empty_graph_test(window)?;
    Ok(GraphSnapshot {
        window_index,
        window_start: window.dates()[0],
        labels: window.labels().to_vec(),
        adjacency,
        sigma: cov.sigma,
        precision: cov.precision,
        pd_shift: cov.pd_shift,
        empty_graph,
        neighborhoods,
    })
}

/// One snapshot per window start `0, step, 2·step, …`; trailing partial
/// windows are dropped. Output is ordered by window start.
pub fn rolling_graphs(panel: &Panel, spec: WindowSpec, options: GraphOptions) -> Result<Vec<GraphSnapshot>> {
    spec.validate(panel.n_cols())?;
    if panel.n_obs() < spec.length {
        return Err(Error::InvalidInput(format!(
            "panel has {} observations, window needs {}",
            panel.n_obs(),
            spec.length
        )));
    }
    let count = window_count(panel.n_obs(), spec);
    let one = |w: usize| -> Result<GraphSnapshot> {
        let window = panel.window(w * spec.step, spec.length)?;
        graph_snapshot(&window, w, options).map_err(|e| e.in_window(w))
    };
    if options.parallel {
        (0..count).into_par_iter().map(one).collect()
    } else {
        (0..count).map(one).collect()
    }
}

fn check_labels(snapshots: &[GraphSnapshot], label: &str) -> Result<Vec<usize>> {
    snapshots.iter().map(|s| s.node(label)).collect()
}

/// Per-window degree of `node` in the (rule-combined) adjacency.
pub fn degree_series(snapshots: &[GraphSnapshot], node: &str) -> Result<Vec<usize>> {
    let idx = check_labels(snapshots, node)?;
    Ok(snapshots.iter().zip(idx).map(|(s, i)| s.adjacency.degree(i)).collect())
}

/// Per-window count of regressors `node` selected, before edge combination.
pub fn neighborhood_size_series(snapshots: &[GraphSnapshot], node: &str) -> Result<Vec<usize>> {
    let idx = check_labels(snapshots, node)?;
    Ok(snapshots
        .iter()
        .zip(idx)
        .map(|(s, i)| s.neighborhoods[i].neighbors.len())
        .collect())
}

/// Per-window coefficient of `j` in `i`'s selected regression, 0 when unselected.
pub fn coefficient_series(snapshots: &[GraphSnapshot], i: &str, j: &str) -> Result<Vec<f64>> {
    if i == j {
        return Err(Error::InvalidInput(format!("coefficient of `{i}` on itself")));
    }
    let ii = check_labels(snapshots, i)?;
    let jj = check_labels(snapshots, j)?;
    Ok(snapshots
        .iter()
        .zip(ii.into_iter().zip(jj))
        .map(|(s, (a, b))| s.neighborhoods[a].coefficient_of(b))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_count_formula() {
        let spec = WindowSpec::default();
        assert_eq!(window_count(150, spec), 1);
        assert_eq!(window_count(1250, spec), 221);
        assert_eq!(window_count(149, spec), 0);
        assert_eq!(window_count(154, spec), 1);
        assert_eq!(window_count(155, spec), 2);
    }
}
