//! Rolling Gaussian graphical structure by neighbourhood selection.
//!
//! Within each window every node is regressed on all the others; the selected
//! regressors form its neighbourhood. Edges need mutual selection (AND rule,
//! OR optional), and the regression coefficients are reassembled into a
//! precision matrix whose zero pattern is exactly the complement of the edge
//! set.

mod covariance;
mod export;
mod independence;
mod neighborhood;
mod rolling;

pub use covariance::{reconstruct_covariance, CovarianceEstimate, PD_SHIFT_EPS};
pub use export::{write_series_csv, write_snapshots_jsonl, SeriesRow, SnapshotRecord};
pub use independence::{empty_graph_test, EmptyGraphTest};
pub use neighborhood::{select_neighborhood, NeighborhoodSet};
pub use rolling::{
    coefficient_series, degree_series, graph_snapshot, neighborhood_size_series, rolling_graphs,
    window_count,
};

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Rolling-window geometry, in observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    pub length: usize,
    pub step: usize,
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec {
            length: 150,
            step: 5,
        }
    }
}

impl WindowSpec {
    pub fn validate(&self, p: usize) -> Result<()> {
        if self.step == 0 {
            return Err(Error::InvalidInput("window step must be ≥ 1".into()));
        }
        if self.length < p + 2 {
            return Err(Error::InvalidInput(format!(
                "window length {} is too short for {p} series (need ≥ {})",
                self.length,
                p + 2
            )));
        }
        Ok(())
    }
}

/// How each node's neighbourhood is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Estimator {
    /// Exhaustive best-subset regression scored by BIC.
    BicSubset,
    /// Full regression on all other nodes.
    Ols,
    Ridge { lambda: f64 },
    Lasso { lambda: f64 },
}

impl Estimator {
    pub fn name(&self) -> &'static str {
        match self {
            Estimator::BicSubset => "bic-subset",
            Estimator::Ols => "ols",
            Estimator::Ridge { .. } => "ridge",
            Estimator::Lasso { .. } => "lasso",
        }
    }

    /// Parses an estimator name, attaching `lambda` to the penalised ones.
    pub fn parse(name: &str, lambda: f64) -> Result<Self> {
        match name {
            "bic-subset" => Ok(Estimator::BicSubset),
            "ols" => Ok(Estimator::Ols),
            "ridge" => Ok(Estimator::Ridge { lambda }),
            "lasso" => Ok(Estimator::Lasso { lambda }),
            other => Err(Error::Config(format!(
                "unknown estimator `{other}` (expected bic-subset, ols, ridge or lasso)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgeRule {
    /// Edge only when each node selects the other.
    #[default]
    And,
    /// Edge when either node selects the other.
    Or,
}

impl FromStr for EdgeRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "and" => Ok(EdgeRule::And),
            "or" => Ok(EdgeRule::Or),
            other => Err(Error::Config(format!("unknown edge rule `{other}` (and|or)"))),
        }
    }
}

impl fmt::Display for EdgeRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeRule::And => "and",
            EdgeRule::Or => "or",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphOptions {
    pub estimator: Estimator,
    pub edge_rule: EdgeRule,
    /// Process windows on the rayon pool. Output is identical either way.
    pub parallel: bool,
}

impl Default for GraphOptions {
    fn default() -> Self {
        GraphOptions {
            estimator: Estimator::BicSubset,
            edge_rule: EdgeRule::And,
            parallel: true,
        }
    }
}

/// Symmetric 0/1 adjacency with an empty diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    p: usize,
    cells: Vec<bool>,
}

impl Adjacency {
    pub fn empty(p: usize) -> Self {
        Adjacency {
            p,
            cells: vec![false; p * p],
        }
    }

    pub fn size(&self) -> usize {
        self.p
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[i * self.p + j]
    }

    /// Sets both `(i, j)` and `(j, i)`; self-loops are ignored.
    pub fn set_edge(&mut self, i: usize, j: usize, on: bool) {
        if i != j {
            self.cells[i * self.p + j] = on;
            self.cells[j * self.p + i] = on;
        }
    }

    pub fn degree(&self, i: usize) -> usize {
        (0..self.p).filter(|&j| self.get(i, j)).count()
    }

    pub fn edge_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count() / 2
    }

    /// Edges `(i, j)` with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.p)
            .flat_map(|i| (i + 1..self.p).map(move |j| (i, j)))
            .filter(|&(i, j)| self.get(i, j))
            .collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.p).all(|i| !self.get(i, i) && (0..self.p).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn to_row_major(&self) -> Vec<u8> {
        self.cells.iter().map(|&c| u8::from(c)).collect()
    }
}

/// Combines per-node neighbourhoods into an adjacency matrix.
pub fn assemble_adjacency(neighborhoods: &[NeighborhoodSet], rule: EdgeRule) -> Result<Adjacency> {
    let p = neighborhoods.len();
    for (i, nb) in neighborhoods.iter().enumerate() {
        if nb.node != i {
            return Err(Error::InvalidInput(format!(
                "neighbourhood {i} belongs to node {}",
                nb.node
            )));
        }
        if let Some(&j) = nb.neighbors.iter().find(|&&j| j >= p || j == i) {
            return Err(Error::InvalidInput(format!("node {i} lists invalid neighbour {j}")));
        }
    }
    let mut adj = Adjacency::empty(p);
    for i in 0..p {
        for j in i + 1..p {
            let ij = neighborhoods[i].neighbors.contains(&j);
            let ji = neighborhoods[j].neighbors.contains(&i);
            let on = match rule {
                EdgeRule::And => ij && ji,
                EdgeRule::Or => ij || ji,
            };
            adj.set_edge(i, j, on);
        }
    }
    Ok(adj)
}

/// Everything estimated for one window.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSnapshot {
    pub window_index: usize,
    pub window_start: NaiveDate,
    pub labels: Vec<String>,
    pub adjacency: Adjacency,
    pub sigma: DMatrix<f64>,
    pub precision: DMatrix<f64>,
    /// Eigenvalue shift applied to make the precision positive definite (0 if none).
    pub pd_shift: f64,
    pub empty_graph: EmptyGraphTest,
    pub neighborhoods: Vec<NeighborhoodSet>,
}

impl GraphSnapshot {
    pub fn node(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::InvalidInput(format!("unknown node `{label}`")))
    }
}
