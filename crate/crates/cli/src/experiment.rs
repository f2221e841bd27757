//! Running experiment files and writing their artifacts.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crd_core::{discretization::DiscretizationError, run_with_ops, DiffOps, RunResult, SimConfig, SimError};
use thiserror::Error;

use crate::config::{ConfigError, ExperimentFile};
use crate::output::{write_run, OutputError};
use crate::report::{compare, Comparison, ReportError, RunSummary};

pub const EXIT_COMPLETED: u8 = 0;
pub const EXIT_IO: u8 = 1;
pub const EXIT_BLOW_UP: u8 = 2;
pub const EXIT_CONFIG: u8 = 3;
pub const EXIT_NUMERIC: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("simulation: {0}")]
    Sim(#[from] SimError),
    #[error("output: {0}")]
    Output(#[from] OutputError),
    #[error(transparent)]
    Report(#[from] ReportError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Read { .. } => EXIT_CONFIG,
            CliError::Sim(SimError::Config(_) | SimError::Mismatch { .. }) => EXIT_CONFIG,
            CliError::Sim(SimError::Discretization(
                DiscretizationError::TooFewIntervals(_)
                | DiscretizationError::InvalidShape(_)
                | DiscretizationError::LengthMismatch { .. },
            )) => EXIT_CONFIG,
            CliError::Sim(_) => EXIT_NUMERIC,
            CliError::Output(_) => EXIT_IO,
            CliError::Report(_) => EXIT_CONFIG,
        }
    }
}

/// A finished run held in memory.
#[derive(Debug, Clone)]
pub struct Executed {
    pub config: SimConfig<f64>,
    pub result: RunResult<f64>,
    pub summary: RunSummary,
    pub nodes: Vec<f64>,
}

fn execute_with_ops(name: &str, config: SimConfig<f64>, ops: &DiffOps<f64>) -> Result<Executed, CliError> {
    let start = Instant::now();
    let result = run_with_ops(&config, ops)?;
    let summary = RunSummary::new(name, &config, &result, start.elapsed().as_secs_f64());
    Ok(Executed { config, result, summary, nodes: ops.grid().nodes().to_vec() })
}

/// Runs an experiment without touching the filesystem.
pub fn execute(file: &ExperimentFile) -> Result<Executed, CliError> {
    let config = file.to_sim_config()?;
    let ops = config.build_ops()?;
    execute_with_ops(file.display_name(), config, &ops)
}

pub fn write_executed(run: &Executed, dir: &Path) -> Result<(), CliError> {
    write_run(dir, &run.result, &run.nodes, &run.summary.render())?;
    Ok(())
}

/// Runs and writes artifacts into `dir`.
pub fn run_experiment(file: &ExperimentFile, dir: &Path) -> Result<Executed, CliError> {
    let run = execute(file)?;
    write_executed(&run, dir)?;
    Ok(run)
}

/// Runs the open- and closed-loop legs concurrently on shared operators and
/// writes them to `dir/open` and `dir/closed`.
pub fn run_compare(file: &ExperimentFile, dir: &Path) -> Result<(Comparison, Executed, Executed), CliError> {
    let mut open = file.clone();
    open.set_open_loop();
    let mut closed = file.clone();
    closed.set_closed_loop();
    let open_cfg = open.to_sim_config()?;
    let closed_cfg = closed.to_sim_config()?;
    let ops = open_cfg.build_ops()?;
    let name = file.display_name();

    let (open_run, closed_run) = std::thread::scope(|s| {
        let o = s.spawn(|| execute_with_ops(name, open_cfg, &ops));
        let c = s.spawn(|| execute_with_ops(name, closed_cfg, &ops));
        (o.join().expect("open-loop leg panicked"), c.join().expect("closed-loop leg panicked"))
    });
    let (open_run, closed_run) = (open_run?, closed_run?);
    let comparison = compare(&open_run.summary, &closed_run.summary)?;
    write_executed(&open_run, &dir.join("open"))?;
    write_executed(&closed_run, &dir.join("closed"))?;
    let path = dir.join("comparison.txt");
    std::fs::write(&path, comparison.render())
        .map_err(|source| CliError::Output(OutputError::Io { path: path.clone(), source }))?;
    Ok((comparison, open_run, closed_run))
}

pub fn outcome_exit_code(run: &Executed) -> u8 {
    if run.result.outcome.is_blow_up() {
        EXIT_BLOW_UP
    } else {
        EXIT_COMPLETED
    }
}
