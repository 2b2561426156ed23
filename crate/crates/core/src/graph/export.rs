use std::io::Write;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::GraphSnapshot;
use crate::error::{Error, Result};
use crate::SCHEMA_VERSION;

/// One JSON-lines record per window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRecord {
    pub schema_version: u32,
    pub window_index: usize,
    pub window_start: NaiveDate,
    pub labels: Vec<String>,
    /// Row-major 0/1.
    pub adjacency: Vec<u8>,
    /// Row-major.
    pub sigma: Vec<f64>,
    pub statistic: f64,
    pub pvalue: f64,
}

impl From<&GraphSnapshot> for SnapshotRecord {
    fn from(s: &GraphSnapshot) -> Self {
        let p = s.labels.len();
        SnapshotRecord {
            schema_version: SCHEMA_VERSION,
            window_index: s.window_index,
            window_start: s.window_start,
            labels: s.labels.clone(),
            adjacency: s.adjacency.to_row_major(),
            sigma: (0..p).flat_map(|i| (0..p).map(move |j| (i, j))).map(|ij| s.sigma[ij]).collect(),
            statistic: s.empty_graph.statistic,
            pvalue: s.empty_graph.p_value,
        }
    }
}

pub fn write_snapshots_jsonl<W: Write>(mut out: W, snapshots: &[GraphSnapshot]) -> Result<()> {
    for s in snapshots {
        serde_json::to_writer(&mut out, &SnapshotRecord::from(s))?;
        out.write_all(b"\n").map_err(|e| Error::io("<snapshots>", e))?;
    }
    Ok(())
}

/// Row of a long-format series file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub window_start: NaiveDate,
    pub node_or_pair: String,
    pub value: f64,
    pub schema_version: u32,
}

/// Writes `(window_start, node_or_pair, value)` rows, one per window per series.
pub fn write_series_csv<W: Write>(
    out: W,
    snapshots: &[GraphSnapshot],
    series: &[(String, Vec<f64>)],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (name, values) in series {
        if values.len() != snapshots.len() {
            return Err(Error::Dimension(format!(
                "series `{name}` has {} values for {} windows",
                values.len(),
                snapshots.len()
            )));
        }
        for (s, &v) in snapshots.iter().zip(values) {
            w.serialize(SeriesRow {
                window_start: s.window_start,
                node_or_pair: name.clone(),
                value: v,
                schema_version: SCHEMA_VERSION,
            })?;
        }
    }
    w.flush().map_err(|e| Error::io("<series>", e))?;
    Ok(())
}
