//! Experiment runner for the `quasalg` toolkit: flat configs in, CSV tables
//! and a text report out.

pub mod config;
pub mod experiments;
pub mod report;

pub use config::{ConfigError, ExperimentConfig};
pub use experiments::{find, run, REGISTRY};
pub use report::{emit_report, Cell, ExperimentReport, Format, Table, Verdict};
