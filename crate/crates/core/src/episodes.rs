//! Episodic data model: per-time-step scene records pairing inputs
//! (position, elevation, LOS flag) with outputs (optimal beam pair, top-k
//! labels), grouped into episodes.

use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::beamcodec::{equivalent_magnitudes, top_k, Codebook, EquivalentMagnitudes};
use crate::channel::{synthesize_channel, ChannelMatrix, PathComponent};
use crate::world::{bs_to_uav_angle, Scene, UavState, Vec3};
use crate::{Error, Result};

pub const FORMAT_VERSION: &str = "caviar-lite/1";

/// A path as stored in records: angles in degrees.
///
/// Channels are always synthesized from this form, so a stored record
/// reproduces its channel bit for bit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub gain: Complex64,
    pub aod_deg: f64,
    pub aoa_deg: f64,
    pub is_los: bool,
}

impl From<&PathComponent> for PathRecord {
    fn from(p: &PathComponent) -> Self {
        Self { gain: p.gain, aod_deg: p.aod.to_degrees(), aoa_deg: p.aoa.to_degrees(), is_los: p.is_los }
    }
}

impl From<&PathRecord> for PathComponent {
    fn from(p: &PathRecord) -> Self {
        Self { gain: p.gain, aod: p.aod_deg.to_radians(), aoa: p.aoa_deg.to_radians(), is_los: p.is_los }
    }
}

/// Channel for a stored path list. A scene with no surviving paths (fully
/// blocked single-path config) has an all-zero channel.
pub fn channel_from_records(paths: &[PathRecord], n_t: usize, n_r: usize) -> Result<ChannelMatrix> {
    if paths.is_empty() {
        if n_t == 0 || n_r == 0 {
            return Err(Error::ZeroAntennas);
        }
        return Ok(ChannelMatrix::zeros(n_r, n_t));
    }
    let comps: Vec<PathComponent> = paths.iter().map(PathComponent::from).collect();
    synthesize_channel(&comps, n_t, n_r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneRecord {
    pub episode_id: u64,
    pub scene_id: usize,
    /// `scene_id * T_sam`, seconds.
    pub timestamp: f64,
    pub uav_position: Vec3,
    pub theta_deg: f64,
    pub los: bool,
    pub paths: Vec<PathRecord>,
    pub magnitudes: Vec<f64>,
    pub best_index: usize,
    pub top_k_labels: Vec<usize>,
}

impl SceneRecord {
    /// A scene with at least one propagation path.
    pub fn has_valid_channel(&self) -> bool {
        !self.paths.is_empty()
    }

    /// Re-derives the magnitudes from the stored paths.
    pub fn recompute(&self, c_t: &Codebook, c_r: &Codebook) -> Result<EquivalentMagnitudes> {
        let h = channel_from_records(&self.paths, c_t.antennas(), c_r.antennas())?;
        equivalent_magnitudes(&h, c_t, c_r)
    }
}

/// Static per-episode context for building records.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordContext {
    pub episode_id: u64,
    pub t_sam: f64,
    pub n_t: usize,
    pub n_r: usize,
    pub top_k: usize,
}

pub fn record_scene(
    ctx: &RecordContext,
    t: usize,
    state: &UavState,
    scene: &Scene,
    paths: Vec<PathRecord>,
    magnitudes: &EquivalentMagnitudes,
) -> Result<SceneRecord> {
    let m = ctx.n_t * ctx.n_r;
    if magnitudes.len() != m {
        return Err(Error::Inconsistent("magnitude count differs from N_t * N_r"));
    }
    if state.t > t {
        return Err(Error::Inconsistent("UAV state is ahead of the time index"));
    }
    let theta = bs_to_uav_angle(scene.bs_position(), state.position)?;
    Ok(SceneRecord {
        episode_id: ctx.episode_id,
        scene_id: t,
        timestamp: t as f64 * ctx.t_sam,
        uav_position: state.position,
        theta_deg: theta.to_degrees(),
        los: !scene.blocks(state.position),
        paths,
        magnitudes: magnitudes.values().to_vec(),
        best_index: magnitudes.best_index(),
        top_k_labels: top_k(magnitudes.values(), ctx.top_k.clamp(1, m))?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub episode_id: u64,
    pub seed: u64,
    pub config_digest: String,
    pub scenes: Vec<SceneRecord>,
}

impl Episode {
    pub fn validate(&self) -> Result<()> {
        for (t, s) in self.scenes.iter().enumerate() {
            if s.scene_id != t {
                return Err(Error::Inconsistent("scene ids must run 0..S-1"));
            }
            if s.episode_id != self.episode_id {
                return Err(Error::Inconsistent("scene belongs to another episode"));
            }
        }
        Ok(())
    }
}

/// Supervised-learning inputs of one scene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneInputs {
    pub uav_position: Vec3,
    pub theta_deg: f64,
    pub los: bool,
}

/// Supervised-learning outputs of one scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneLabels {
    pub best_index: usize,
    pub top_k_labels: Vec<usize>,
}

pub fn to_supervised_pairs(episode: &Episode) -> Vec<(SceneInputs, SceneLabels)> {
    episode
        .scenes
        .iter()
        .map(|s| {
            (
                SceneInputs { uav_position: s.uav_position, theta_deg: s.theta_deg, los: s.los },
                SceneLabels { best_index: s.best_index, top_k_labels: s.top_k_labels.clone() },
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeEntry {
    pub episode_id: u64,
    pub file: String,
    pub seed: u64,
    pub scenes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: String,
    pub name: String,
    pub num_episodes: usize,
    pub scenes_per_episode: usize,
    pub t_sam: f64,
    pub n_t: usize,
    pub n_r: usize,
    pub num_pairs: usize,
    pub frequency_label: String,
    pub master_seed: u64,
    pub config_digest: String,
    pub episodes: Vec<EpisodeEntry>,
}
