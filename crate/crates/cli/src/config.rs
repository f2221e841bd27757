//! Experiment files: sectioned TOML parsed into [`ExperimentFile`] and
//! converted to a validated [`SimConfig`].

use std::path::{Path, PathBuf};

use crd_core::{
    AlphaSpec, Backend, Branch, ControllerKind, ControllerSpec, Convection, ConvectionForm, InitialCondition, LoopMode,
    ReactionSpec, ReactionTerm, SimConfig, SimError,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ic::parse_profile;

/// Environment variable naming the root directory for relative output paths.
pub const OUT_DIR_ENV: &str = "CRD_OUT_DIR";
/// Multiquadric shape used when `grid.shape` is omitted.
pub const DEFAULT_RBF_SHAPE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("`{key}`: {message}")]
    Invalid { key: String, message: String },
}

impl ConfigError {
    fn invalid(key: &str, message: impl Into<String>) -> Self {
        ConfigError::Invalid { key: key.to_string(), message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub plant: PlantSection,
    pub grid: GridSection,
    pub time: TimeSection,
    #[serde(default)]
    pub control: ControlSection,
    pub ic: IcSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantSection {
    pub epsilon: f64,
    /// One of `none`, `+u^2`, `-u^2`, `+u`, `+u^3`, `-u`, `-u^3`.
    #[serde(default = "default_convection")]
    pub convection: String,
    /// `conservative` (default), `chain_rule` or `rusanov`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convection_form: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reaction: Vec<ReactionEntry>,
}

fn default_convection() -> String {
    "none".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReactionEntry {
    pub coefficient: f64,
    pub power: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    /// `fd` (default) or `rbf`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend: Option<String>,
    /// Multiquadric shape parameter, used by the `rbf` backend.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub dt: f64,
    pub t_final: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSection {
    /// `open` or `closed`; defaults to `closed` when any other control key
    /// is present and `open` otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    /// Defaults to the controller matching the plant convection.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_gain: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<String>,
}

impl ControlSection {
    fn is_closed(&self) -> Result<bool, ConfigError> {
        match self.mode.as_deref() {
            Some("open") => Ok(false),
            Some("closed") => Ok(true),
            Some(other) => {
                Err(ConfigError::invalid("control.mode", format!("expected `open` or `closed`, got `{other}`")))
            }
            None => Ok(self.kind.is_some()
                || self.alpha_gain.is_some()
                || self.alpha_exponent.is_some()
                || self.branch.is_some()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IcSection {
    /// Named profile, see [`ic_preset`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// Expression in the initial-condition mini-language.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    /// Number of snapshot frames over the run (default 200).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshots: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blowup_threshold: Option<f64>,
}

/// Named initial profiles and their expressions.
pub const IC_PRESETS: [(&str, &str); 5] = [
    ("blowup_s3", "-300*cos(10*pi*x) + 300"),
    ("blowup_s3_unit", "-1*cos(10*pi*x) + 1"),
    ("sine", "sin(pi*x)"),
    ("parabola", "x - x^2"),
    ("zero", "0"),
];

pub fn ic_preset(name: &str) -> Option<&'static str> {
    IC_PRESETS.iter().find(|(n, _)| *n == name).map(|(_, e)| *e)
}

/// Parses and validates an experiment file.
pub fn parse_config(text: &str) -> Result<ExperimentFile, ConfigError> {
    let file: ExperimentFile = toml::from_str(text).map_err(|e| {
        let start = e.span().map_or(0, |s| s.start).min(text.len());
        let before = &text[..start];
        let line = before.matches('\n').count() + 1;
        let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
        ConfigError::Syntax { line, column, message: e.message().trim().to_string() }
    })?;
    file.to_sim_config()?;
    Ok(file)
}

pub fn render(file: &ExperimentFile) -> String {
    toml::to_string(file).expect("experiment files always serialize")
}

fn positive(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::invalid(key, format!("must be positive and finite, got {v}")))
    }
}

impl ExperimentFile {
    pub fn display_name(&self) -> &str {
        self.name.as_deref().unwrap_or("run")
    }

    pub fn is_closed_loop(&self) -> Result<bool, ConfigError> {
        self.control.is_closed()
    }

    pub fn set_backend(&mut self, backend: &str) {
        self.grid.backend = Some(backend.to_string());
    }

    pub fn set_open_loop(&mut self) {
        self.control.mode = Some("open".into());
    }

    pub fn set_closed_loop(&mut self) {
        self.control.mode = Some("closed".into());
    }

    /// The configured output directory, resolved against `root` when relative.
    pub fn output_dir(&self, root: Option<&Path>) -> PathBuf {
        let dir =
            self.output.dir.clone().map(PathBuf::from).unwrap_or_else(|| Path::new("out").join(self.display_name()));
        match root {
            Some(r) if dir.is_relative() => r.join(dir),
            _ => dir,
        }
    }

    pub fn backend(&self) -> Result<Backend<f64>, ConfigError> {
        match self.grid.backend.as_deref().unwrap_or("fd") {
            "fd" => Ok(Backend::FiniteDifference),
            "rbf" => {
                let shape = self.grid.shape.unwrap_or(DEFAULT_RBF_SHAPE);
                Ok(Backend::Multiquadric { shape: positive("grid.shape", shape)? })
            }
            other => Err(ConfigError::invalid("grid.backend", format!("expected `fd` or `rbf`, got `{other}`"))),
        }
    }

    pub fn to_sim_config(&self) -> Result<SimConfig<f64>, ConfigError> {
        let epsilon = positive("plant.epsilon", self.plant.epsilon)?;
        let convection: Convection = self.plant.convection.parse().map_err(|_| {
            ConfigError::invalid("plant.convection", format!("unknown convection `{}`", self.plant.convection))
        })?;
        let convection_form = match &self.plant.convection_form {
            None => ConvectionForm::default(),
            Some(s) => {
                s.parse().map_err(|_| ConfigError::invalid("plant.convection_form", format!("unknown form `{s}`")))?
            }
        };
        let terms =
            self.plant.reaction.iter().map(|r| ReactionTerm { coefficient: r.coefficient, power: r.power }).collect();
        let reaction = ReactionSpec::new(terms).map_err(|e| ConfigError::invalid("plant.reaction", e.to_string()))?;

        if self.grid.n < crd_core::discretization::MIN_INTERVALS || self.grid.n > 100_000 {
            return Err(ConfigError::invalid("grid.n", format!("must be in 4..=100000, got {}", self.grid.n)));
        }
        if let Some(shape) = self.grid.shape {
            positive("grid.shape", shape)?;
        }
        let backend = self.backend()?;
        let dt = positive("time.dt", self.time.dt)?;
        let t_final = positive("time.t_final", self.time.t_final)?;
        if t_final / dt > 1e8 {
            return Err(ConfigError::invalid("time.dt", "more than 1e8 steps requested"));
        }

        let initial = match (&self.ic.preset, &self.ic.expr) {
            (Some(_), Some(_)) => return Err(ConfigError::invalid("ic", "give either `preset` or `expr`, not both")),
            (None, None) => return Err(ConfigError::invalid("ic", "one of `preset` or `expr` is required")),
            (Some(name), None) => {
                let expr = ic_preset(name)
                    .ok_or_else(|| ConfigError::invalid("ic.preset", format!("unknown preset `{name}`")))?;
                parse_profile(expr).expect("shipped profiles parse")
            }
            (None, Some(expr)) => parse_profile(expr).map_err(|e| ConfigError::invalid("ic.expr", e.to_string()))?,
        };

        let loop_mode = if self.control.is_closed()? {
            let kind = match &self.control.kind {
                Some(k) => k
                    .parse::<ControllerKind>()
                    .map_err(|_| ConfigError::invalid("control.kind", format!("unknown controller `{k}`")))?,
                None => convection.controller_kind().ok_or_else(|| {
                    ConfigError::invalid(
                        "control.kind",
                        "no controller matches convection `none`; closed loop needs a convective plant",
                    )
                })?,
            };
            let gain = positive("control.alpha_gain", self.control.alpha_gain.unwrap_or(1.0))?;
            let exponent = self.control.alpha_exponent.unwrap_or(1.0);
            if !(exponent.is_finite() && exponent >= 1.0) {
                return Err(ConfigError::invalid("control.alpha_exponent", format!("must be >= 1, got {exponent}")));
            }
            let branch = match &self.control.branch {
                None => Branch::default(),
                Some(b) => b.parse().map_err(|_| {
                    ConfigError::invalid("control.branch", format!("expected `plus` or `minus`, got `{b}`"))
                })?,
            };
            LoopMode::Closed(ControllerSpec::new(kind, AlphaSpec { gain, exponent }, epsilon).with_branch(branch))
        } else {
            LoopMode::Open
        };

        let mut config = SimConfig::new(epsilon, self.grid.n, dt, t_final);
        config.reaction = reaction;
        config.convection = convection;
        config.convection_form = convection_form;
        config.backend = backend;
        config.initial = InitialCondition::Profile(initial);
        config.loop_mode = loop_mode;
        if let Some(th) = self.output.blowup_threshold {
            config.blowup_threshold = positive("output.blowup_threshold", th)?;
        }
        if let Some(frames) = self.output.snapshots {
            if frames == 0 {
                return Err(ConfigError::invalid("output.snapshots", "must be >= 1"));
            }
            config.snapshot_every = Some(config.n_steps().div_ceil(frames).max(1));
        }
        config.validate().map_err(|e| match e {
            SimError::Mismatch { .. } => ConfigError::invalid("control.kind", e.to_string()),
            other => ConfigError::invalid("config", other.to_string()),
        })?;
        Ok(config)
    }
}
