//! Run summaries and open/closed comparisons.

use std::fmt::Write as _;

use crd_core::{Backend, Outcome, RunResult, SimConfig};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReportError {
    #[error("cannot compare runs with different settings: {0}")]
    Mismatch(String),
}

/// Plant, grid and time settings two runs must share to be compared.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub epsilon: f64,
    pub convection: String,
    pub grid_n: usize,
    pub backend: String,
    pub dt: f64,
    pub t_final: f64,
}

impl Settings {
    pub fn of(config: &SimConfig<f64>) -> Self {
        let backend = match config.backend {
            Backend::FiniteDifference => "fd".to_string(),
            Backend::Multiquadric { shape } => format!("rbf(shape={shape:?})"),
        };
        Self {
            epsilon: config.epsilon,
            convection: config.convection.to_string(),
            grid_n: config.grid_n,
            backend,
            dt: config.dt,
            t_final: config.t_final,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub name: String,
    pub mode: String,
    pub settings: Settings,
    pub outcome: Outcome<f64>,
    pub v_initial: f64,
    /// `V(t_final)` for completed runs.
    pub v_final: Option<f64>,
    pub decay_rate: Option<f64>,
    pub max_abs_control: f64,
    pub steps: usize,
    pub wall_clock_seconds: f64,
}

impl RunSummary {
    pub fn new(name: &str, config: &SimConfig<f64>, result: &RunResult<f64>, wall_clock_seconds: f64) -> Self {
        let mode = match config.loop_mode {
            crd_core::LoopMode::Open => "open".to_string(),
            crd_core::LoopMode::Closed(spec) => format!("closed({})", spec.kind),
        };
        let v_final = match result.outcome {
            Outcome::Completed => result.series.last().map(|r| r.lyapunov),
            Outcome::BlowUp { .. } => None,
        };
        Self {
            name: name.to_string(),
            mode,
            settings: Settings::of(config),
            outcome: result.outcome,
            v_initial: result.series.first().map_or(f64::NAN, |r| r.lyapunov),
            v_final,
            decay_rate: result.decay_rate().ok(),
            max_abs_control: result.max_abs_control(),
            steps: result.series.len().saturating_sub(1),
            wall_clock_seconds,
        }
    }

    pub fn blow_up_time(&self) -> Option<f64> {
        match self.outcome {
            Outcome::BlowUp { time } => Some(time),
            Outcome::Completed => None,
        }
    }

    /// `key: value` lines.
    pub fn render(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:?}"));
        let s = &self.settings;
        let mut out = String::new();
        let outcome = match self.outcome {
            Outcome::Completed => "completed",
            Outcome::BlowUp { .. } => "blow_up",
        };
        let _ = writeln!(out, "name: {}", self.name);
        let _ = writeln!(out, "mode: {}", self.mode);
        let _ = writeln!(out, "outcome: {outcome}");
        let _ = writeln!(out, "blow_up_time: {}", opt(self.blow_up_time()));
        let _ = writeln!(out, "v_initial: {:?}", self.v_initial);
        let _ = writeln!(out, "v_final: {}", opt(self.v_final));
        let _ = writeln!(out, "decay_rate: {}", opt(self.decay_rate));
        let _ = writeln!(out, "max_abs_control: {:?}", self.max_abs_control);
        let _ = writeln!(out, "steps: {}", self.steps);
        let _ = writeln!(out, "epsilon: {:?}", s.epsilon);
        let _ = writeln!(out, "convection: {}", s.convection);
        let _ = writeln!(out, "grid_n: {}", s.grid_n);
        let _ = writeln!(out, "backend: {}", s.backend);
        let _ = writeln!(out, "dt: {:?}", s.dt);
        let _ = writeln!(out, "t_final: {:?}", s.t_final);
        let _ = writeln!(out, "wall_clock_seconds: {:.3}", self.wall_clock_seconds);
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub open: RunSummary,
    pub closed: RunSummary,
    pub blow_up_prevented: bool,
}

pub fn compare(open: &RunSummary, closed: &RunSummary) -> Result<Comparison, ReportError> {
    if open.settings != closed.settings {
        return Err(ReportError::Mismatch(format!("{:?} vs {:?}", open.settings, closed.settings)));
    }
    Ok(Comparison {
        open: open.clone(),
        closed: closed.clone(),
        blow_up_prevented: open.outcome.is_blow_up() && !closed.outcome.is_blow_up(),
    })
}

impl Comparison {
    pub fn render(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:?}"));
        let outcome = |s: &RunSummary| match s.outcome {
            Outcome::Completed => "completed".to_string(),
            Outcome::BlowUp { time } => format!("blow_up at t={time:?}"),
        };
        let mut out = String::new();
        let _ = writeln!(out, "{:<18} {:<28} {:<28}", "", "open", "closed");
        let rows = [
            ("mode", self.open.mode.clone(), self.closed.mode.clone()),
            ("outcome", outcome(&self.open), outcome(&self.closed)),
            ("v_initial", format!("{:?}", self.open.v_initial), format!("{:?}", self.closed.v_initial)),
            ("v_final", opt(self.open.v_final), opt(self.closed.v_final)),
            ("decay_rate", opt(self.open.decay_rate), opt(self.closed.decay_rate)),
            (
                "max_abs_control",
                format!("{:?}", self.open.max_abs_control),
                format!("{:?}", self.closed.max_abs_control),
            ),
        ];
        for (k, a, b) in rows {
            let _ = writeln!(out, "{k:<18} {a:<28} {b:<28}");
        }
        let _ = writeln!(out, "blow_up_prevented: {}", self.blow_up_prevented);
        out
    }
}
