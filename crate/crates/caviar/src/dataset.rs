//! OUTLOOP datasets: `manifest.json` plus one JSON-lines file per episode,
//! one scene record per line.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use caviar_core::episodes::{DatasetManifest, Episode, EpisodeEntry, SceneRecord, FORMAT_VERSION};
use caviar_core::rlenv::BeamEnv;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn episode_file_name(episode_id: u64) -> String {
    format!("episode_{episode_id:05}.jsonl")
}

/// Flies one episode with a fixed action; labels do not depend on it.
pub fn generate_episode(env: &BeamEnv, episode_id: u64, digest: &str) -> Result<Episode, CliError> {
    let mut env = env.clone();
    env.reset(episode_id)?;
    let mut scenes = Vec::with_capacity(env.episode_len());
    loop {
        let res = env.step(0)?;
        scenes.push(res.info);
        if res.done {
            break;
        }
    }
    Ok(Episode { episode_id, seed: episode_id, config_digest: digest.to_string(), scenes })
}

/// Generates `dataset.episodes` episodes in parallel; episode `e` uses
/// environment seed `e`.
pub fn generate(config: &ExperimentConfig) -> Result<(DatasetManifest, Vec<Episode>), CliError> {
    let env = config.build_env()?;
    let digest = config.digest();
    let episodes = (0..config.dataset.episodes as u64)
        .into_par_iter()
        .map(|e| generate_episode(&env, e, &digest))
        .collect::<Result<Vec<_>, _>>()?;
    let manifest = DatasetManifest {
        format_version: FORMAT_VERSION.to_string(),
        name: config.name.clone(),
        num_episodes: episodes.len(),
        scenes_per_episode: env.episode_len(),
        t_sam: config.episode.t_sam,
        n_t: config.array.n_t,
        n_r: config.array.n_r,
        num_pairs: env.num_actions(),
        frequency_label: config.dataset.frequency_label.clone(),
        master_seed: config.seed,
        config_digest: digest,
        episodes: episodes
            .iter()
            .map(|e| EpisodeEntry {
                episode_id: e.episode_id,
                file: episode_file_name(e.episode_id),
                seed: e.seed,
                scenes: e.scenes.len(),
            })
            .collect(),
    };
    Ok((manifest, episodes))
}

pub fn write(dir: &Path, manifest: &DatasetManifest, episodes: &[Episode]) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    for (entry, episode) in manifest.episodes.iter().zip(episodes) {
        let path = dir.join(&entry.file);
        let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut w = BufWriter::new(file);
        for scene in &episode.scenes {
            serde_json::to_writer(&mut w, scene).map_err(|e| CliError::data(&path, e.to_string()))?;
            w.write_all(b"\n").map_err(|e| CliError::io(&path, e))?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
    }
    let path = dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(&path, text).map_err(|e| CliError::io(&path, e))
}

fn read_episode(path: &Path, entry: &EpisodeEntry, manifest: &DatasetManifest) -> Result<Episode, CliError> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut scenes = Vec::with_capacity(entry.scenes);
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let scene: SceneRecord =
            serde_json::from_str(&line).map_err(|e| CliError::data(path, format!("line {}: {e}", n + 1)))?;
        if scene.magnitudes.len() != manifest.num_pairs {
            return Err(CliError::data(
                path,
                format!("line {}: {} magnitudes, manifest says {}", n + 1, scene.magnitudes.len(), manifest.num_pairs),
            ));
        }
        scenes.push(scene);
    }
    if scenes.len() != entry.scenes {
        return Err(CliError::data(path, format!("{} scenes, manifest says {}", scenes.len(), entry.scenes)));
    }
    let episode =
        Episode { episode_id: entry.episode_id, seed: entry.seed, config_digest: manifest.config_digest.clone(), scenes };
    episode.validate().map_err(|e| CliError::data(path, e.to_string()))?;
    Ok(episode)
}

/// Loads and cross-checks a dataset written by [`write`].
pub fn read(dir: &Path) -> Result<(DatasetManifest, Vec<Episode>), CliError> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let manifest: DatasetManifest = serde_json::from_str(&text).map_err(|e| CliError::data(&path, e.to_string()))?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(CliError::data(
            &path,
            format!("format version `{}`, expected `{FORMAT_VERSION}`", manifest.format_version),
        ));
    }
    if manifest.episodes.len() != manifest.num_episodes {
        return Err(CliError::data(
            &path,
            format!("{} episode entries, num_episodes is {}", manifest.episodes.len(), manifest.num_episodes),
        ));
    }
    if manifest.num_pairs != manifest.n_t * manifest.n_r {
        return Err(CliError::data(&path, "num_pairs differs from n_t * n_r"));
    }
    let episodes = manifest
        .episodes
        .iter()
        .map(|entry| read_episode(&dir.join(&entry.file), entry, &manifest))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((manifest, episodes))
}
