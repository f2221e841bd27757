//! Experiment runner for closed-loop boundary control of
//! reaction-convection-diffusion equations.

pub mod config;
pub mod experiment;
pub mod ic;
pub mod output;
pub mod presets;
pub mod report;
pub mod svg;

pub use config::{parse_config, render, ConfigError, ExperimentFile};
pub use experiment::{execute, run_compare, run_experiment, CliError, Executed};
pub use report::{compare, Comparison, RunSummary};
