//! File-based runs: configuration, CSV/JSON I/O, simulators and the pipeline
//! driver used by the `partition` binary.

pub mod config;
pub mod io;
pub mod run;
pub mod simulate;

pub use config::{parse_kv, read_kv_file, ContagionPreset, PipelineKind, RunConfig};
pub use run::{config_from_manifest, run, Manifest, OutputFile, RunSummary, MANIFEST};
