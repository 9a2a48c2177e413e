//! Experiment harness around `dic_core`: configuration, the `run`, `prune-stats`, `oracle`
//! and `gen` commands, and their output files.

pub mod config;
pub mod error;
pub mod gen;
pub mod oracle;
pub mod prune;
pub mod run;

pub use config::{parse_budgets, ExperimentConfig, NetworkSource, StrategyKind};
pub use error::CliError;
pub use run::{cmd_run, execute, RunReport, RunRow, SummaryRow};
