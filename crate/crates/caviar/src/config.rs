//! Experiment configuration: one JSON document plus `key.path=value`
//! overrides.

use std::fs;
use std::path::Path;

use caviar_core::agents::LearningConfig;
use caviar_core::channel::ChannelParams;
use caviar_core::rlenv::{BeamEnv, EnvConfig};
use caviar_core::world::{Scene, TrajectoryPlan};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Every key, with defaults, as shown by `caviar --help`.
pub const CONFIG_HELP: &str = "\
Config file (JSON). Keys and defaults:
  name                          \"caviar\"
  seed                          0        master seed, overridden by --seed
  scene.bs_position             required [x, y, z] metres
  scene.obstacles               []       [{\"min\": [..], \"max\": [..]}]
  scene.nlos_angle_masks_deg    []       [[lo, hi], ..] elevation bands
  trajectory.phases             required [{\"name\": takeoff|cruise|land,
                                           \"duration\", \"start\", \"end\"}]
  channel.num_paths             3
  channel.los_amplitude         1.0
  channel.nlos_sigma            0.55
  channel.nlos_aod_range_deg    [-60, 60]
  array.n_t                     64
  array.n_r                     1
  episode.length                null     (whole flight plan)
  episode.t_sam                 0.1      seconds
  episode.top_k                 5
  dataset.episodes              10
  dataset.frequency_label       \"60GHz\"
  learning.alpha                0.1
  learning.gamma                0.0
  learning.epsilon_start        1.0
  learning.epsilon_end          0.05
  learning.decay_fraction       0.5
  learning.episodes             0
  learning.bins                 128
  learning.theta_range_deg      [-90, 90]
  evaluation.seeds              20
  evaluation.first_seed         1000000

Override any key with --set key.path=value (value parsed as JSON, else
taken as a string).";

fn default_name() -> String {
    "caviar".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayConfig {
    #[serde(default = "ArrayConfig::default_n_t")]
    pub n_t: usize,
    #[serde(default = "ArrayConfig::default_n_r")]
    pub n_r: usize,
}

impl ArrayConfig {
    fn default_n_t() -> usize {
        64
    }
    fn default_n_r() -> usize {
        1
    }
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self { n_t: Self::default_n_t(), n_r: Self::default_n_r() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpisodeConfig {
    #[serde(default)]
    pub length: Option<usize>,
    #[serde(default = "EpisodeConfig::default_t_sam")]
    pub t_sam: f64,
    #[serde(default = "EpisodeConfig::default_top_k")]
    pub top_k: usize,
}

impl EpisodeConfig {
    fn default_t_sam() -> f64 {
        0.1
    }
    fn default_top_k() -> usize {
        5
    }
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self { length: None, t_sam: Self::default_t_sam(), top_k: Self::default_top_k() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    #[serde(default = "DatasetConfig::default_episodes")]
    pub episodes: usize,
    #[serde(default = "DatasetConfig::default_frequency_label")]
    pub frequency_label: String,
}

impl DatasetConfig {
    fn default_episodes() -> usize {
        10
    }
    fn default_frequency_label() -> String {
        "60GHz".into()
    }
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self { episodes: Self::default_episodes(), frequency_label: Self::default_frequency_label() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationConfig {
    #[serde(default = "EvaluationConfig::default_seeds")]
    pub seeds: usize,
    #[serde(default = "EvaluationConfig::default_first_seed")]
    pub first_seed: u64,
}

impl EvaluationConfig {
    fn default_seeds() -> usize {
        20
    }
    fn default_first_seed() -> u64 {
        1_000_000
    }

    pub fn seed_list(&self) -> Vec<u64> {
        (0..self.seeds as u64).map(|i| self.first_seed + i).collect()
    }
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self { seeds: Self::default_seeds(), first_seed: Self::default_first_seed() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub scene: Scene,
    pub trajectory: TrajectoryPlan,
    #[serde(default)]
    pub channel: ChannelParams,
    #[serde(default)]
    pub array: ArrayConfig,
    #[serde(default)]
    pub episode: EpisodeConfig,
    #[serde(default)]
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub learning: LearningConfig,
    #[serde(default)]
    pub evaluation: EvaluationConfig,
}

impl ExperimentConfig {
    pub fn env_config(&self) -> EnvConfig {
        EnvConfig {
            scene: self.scene.clone(),
            trajectory: self.trajectory.clone(),
            channel: self.channel.clone(),
            n_t: self.array.n_t,
            n_r: self.array.n_r,
            episode_len: self.episode.length,
            t_sam: self.episode.t_sam,
            top_k: self.episode.top_k,
            master_seed: self.seed,
        }
    }

    pub fn build_env(&self) -> Result<BeamEnv, CliError> {
        BeamEnv::new(self.env_config()).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Hex SHA-256 of the canonical JSON form, stored in every output.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    /// Cross-field checks that serde cannot express.
    pub fn validate(&self) -> Result<(), CliError> {
        let field = |name: &str, e: caviar_core::Error| CliError::Config(format!("{name}: {e}"));
        self.channel.validate().map_err(|e| field("channel", e))?;
        self.learning.validate().map_err(|e| field("learning", e))?;
        self.env_config().validate().map_err(|e| field("episode", e))?;
        Ok(())
    }
}

/// Sets `key` (dotted path, numeric segments index arrays) in `doc`.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("--set expects key=value, got `{assignment}`")))?;
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(CliError::Usage(format!("--set has a malformed key `{key}`")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut cur = doc;
    let segments: Vec<&str> = key.split('.').collect();
    for (i, seg) in segments.iter().enumerate() {
        let last = i + 1 == segments.len();
        let here = segments[..i].join(".");
        cur = match cur {
            Value::Object(map) => {
                if last {
                    map.insert(seg.to_string(), value);
                    return Ok(());
                }
                map.entry(seg.to_string()).or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let idx: usize = seg
                    .parse()
                    .map_err(|_| CliError::Config(format!("{key}: `{here}` is an array, `{seg}` is not an index")))?;
                let len = items.len();
                let slot = items
                    .get_mut(idx)
                    .ok_or_else(|| CliError::Config(format!("{key}: index {idx} out of range for `{here}` (len {len})")))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => return Err(CliError::Config(format!("{key}: `{here}` is not an object"))),
        };
    }
    unreachable!("loop returns on the last segment")
}

/// Parses a config document, naming the offending field on failure.
pub fn from_value(doc: Value) -> Result<ExperimentConfig, CliError> {
    let config: ExperimentConfig = serde_path_to_error::deserialize(doc).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(format!("{path}: {}", e.into_inner()))
    })?;
    config.validate()?;
    Ok(config)
}

/// Reads `path`, applies overrides and an optional seed, validates.
pub fn load(path: &Path, overrides: &[String], seed: Option<u64>) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut doc: Value = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    if let Some(seed) = seed {
        apply_override(&mut doc, &format!("seed={seed}"))?;
    }
    from_value(doc)
}
