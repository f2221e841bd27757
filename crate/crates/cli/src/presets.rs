//! Experiment files shipped with the binary.

use crate::config::{parse_config, ConfigError, ExperimentFile};

#[derive(Debug, Clone, Copy)]
pub struct Preset {
    pub name: &'static str,
    pub text: &'static str,
}

pub const PRESETS: [Preset; 5] = [
    Preset { name: "blowup_s3", text: include_str!("../presets/blowup_s3.toml") },
    Preset { name: "blowup_s3_unit", text: include_str!("../presets/blowup_s3_unit.toml") },
    Preset { name: "zero_ic", text: include_str!("../presets/zero_ic.toml") },
    Preset { name: "heat", text: include_str!("../presets/heat.toml") },
    Preset { name: "counter", text: include_str!("../presets/counter.toml") },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

impl Preset {
    pub fn load(&self) -> Result<ExperimentFile, ConfigError> {
        parse_config(self.text)
    }
}
