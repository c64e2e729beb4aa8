//! Experiment configurations: the JSON form every run is echoed as, and can be replayed from.
//!
//! ```json
//! {"schema_version": 1, "command": {"name": "collision", "params": {"n": 4, "layers": 3}}}
//! ```
//!
//! Unknown fields are rejected at every level.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use spcirc::brauer_weingarten::BrauerGroup;
use spcirc::group_sampler::Group;
use spcirc::PauliString;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub command: Command,
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        ExperimentConfig { schema_version: SCHEMA_VERSION, command }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", content = "params", rename_all = "kebab-case")]
pub enum Command {
    Closure(ClosureConfig),
    Sample(SampleConfig),
    Twirl(TwirlConfig),
    Gram(GramConfig),
    Simulate(SimulateConfig),
    Gp(GpConfig),
    GpSummary(GpConfig),
    Concentration(ConcentrationConfig),
    Anticoncentration(AnticoncentrationConfig),
    AnticoncentrationDepth(DepthConfig),
    Collision(CollisionConfig),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Closure(_) => "closure",
            Command::Sample(_) => "sample",
            Command::Twirl(_) => "twirl",
            Command::Gram(_) => "gram",
            Command::Simulate(_) => "simulate",
            Command::Gp(_) => "gp",
            Command::GpSummary(_) => "gp-summary",
            Command::Concentration(_) => "concentration",
            Command::Anticoncentration(_) => "anticoncentration",
            Command::AnticoncentrationDepth(_) => "anticoncentration-depth",
            Command::Collision(_) => "collision",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SetName {
    Theorem1,
    Prop2,
    SoChain,
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosureConfig {
    pub set: SetName,
    pub n: usize,
    /// Only for `custom`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<PauliString>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_dimension: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub group: Group,
    pub d: usize,
    pub count: usize,
    pub seed: u64,
    pub out: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwirlConfig {
    pub t: usize,
    pub d: usize,
    pub group: BrauerGroup,
    pub input: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GramConfig {
    pub t: usize,
    pub d: usize,
    pub group: BrauerGroup,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub circuit: PathBuf,
    /// Computational-basis input state index.
    pub state: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// Experiment part of a GP run, as read from `--config`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpExperiment {
    pub schema_version: u32,
    pub n: usize,
    /// State specifications, see [`crate::states`].
    pub states: Vec<String>,
    pub observable: PauliString,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpConfig {
    pub n: usize,
    pub states: Vec<String>,
    pub observable: PauliString,
    pub samples: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConcentrationConfig {
    pub n: usize,
    pub state: String,
    pub observable: PauliString,
    pub samples: usize,
    pub seed: u64,
    /// Explicit thresholds; otherwise `points` multiples of `step * sigma`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Vec<f64>>,
    pub points: usize,
    pub step: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnticoncentrationConfig {
    pub n: usize,
    pub samples: usize,
    pub alphas: Vec<f64>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DepthConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub epsilon: f64,
    pub max_layers: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollisionConfig {
    pub n: usize,
    pub layers: usize,
}
