//! Scenario runner for the `scalab` binary: configuration, model presets,
//! the six commands and their artifact files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod expr;
pub mod output;
pub mod presets;
pub mod run;

pub use config::{Command, ScenarioConfig};
pub use output::{emit_csv, emit_dat, read_csv, Report};
pub use run::{run_scenario, CliError};
