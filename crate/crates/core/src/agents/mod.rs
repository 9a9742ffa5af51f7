//! Beam-selection policies and the train / evaluate drivers.

mod eval;
mod qlearn;

pub use eval::{evaluate, EvalReport, PolicySummary, TraceRow};
pub use qlearn::{q_update, train, EpisodeStats, GreedyPolicy, LearningConfig, QTable, TrainOutcome};

use crate::beamcodec::{Codebook, EquivalentMagnitudes};
use crate::channel::steering_vector;
use crate::rlenv::{BeamEnv, Observation};
use crate::Result;

pub trait Policy {
    fn name(&self) -> &str;
    fn act(&mut self, obs: &Observation, env: &mut BeamEnv) -> Result<usize>;
}

/// Exhaustive search over all beam pairs.
pub fn oracle_action(magnitudes: &EquivalentMagnitudes) -> usize {
    magnitudes.best_index()
}

/// Codebook beam closest to the steering direction `theta` (radians): the
/// first index maximizing `|a(theta)^H f|`.
pub fn baseline_beam(theta: f64, codebook: &Codebook) -> usize {
    let a = steering_vector(codebook.antennas(), theta).expect("codebooks are never empty");
    let mut best = (0, f64::NEG_INFINITY);
    for (i, f) in codebook.beams().enumerate() {
        let g = a.iter().zip(f).fold(num_complex::Complex64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y).norm();
        if g > best.1 {
            best = (i, g);
        }
    }
    best.0
}

/// Straight-path heuristic: both ends point along the BS-UAV elevation.
pub fn baseline_action(theta: f64, c_t: &Codebook, c_r: &Codebook) -> usize {
    let p = baseline_beam(theta, c_t);
    let q = if c_r.len() == 1 { 0 } else { baseline_beam(theta, c_r) };
    p * c_r.len() + q
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OraclePolicy;

impl Policy for OraclePolicy {
    fn name(&self) -> &str {
        "oracle"
    }

    fn act(&mut self, _obs: &Observation, env: &mut BeamEnv) -> Result<usize> {
        Ok(oracle_action(env.ground_truth()?))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BaselinePolicy;

impl Policy for BaselinePolicy {
    fn name(&self) -> &str {
        "baseline"
    }

    fn act(&mut self, obs: &Observation, env: &mut BeamEnv) -> Result<usize> {
        Ok(baseline_action(obs.theta_deg.to_radians(), env.transmit_codebook(), env.receive_codebook()))
    }
}
