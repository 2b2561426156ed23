//! Time-partitioned model selection.
//!
//! Two pipelines share this crate:
//!
//! - **Contagion**: four-factor residuals for a panel of equity indices, then
//!   rolling Gaussian graphical structure where every node's neighbourhood is
//!   the BIC-best subset regression on the other nodes ([`factor`], [`graph`],
//!   built on [`regression`]).
//! - **Changepoint screening**: per-firm posteriors over the year of a single
//!   performance shift, sampled with a collapsed Gibbs sampler whose per-firm
//!   conditionals are closed-form multivariate-T marginals ([`changepoint`]).
//!
//! [`pipeline`] wires both into file-based runs with simulators, loaders and
//! report writers; the `partition` binary is a thin shell over it.

pub mod changepoint;
pub mod error;
pub mod factor;
pub mod graph;
pub mod panel;
pub mod pipeline;
pub mod regression;
pub mod rng;

pub use error::{Error, Result};
pub use panel::{Panel, ResidualPanel, ReturnPanel};

/// Version tag written into every artifact.
pub const SCHEMA_VERSION: u32 = 1;
