use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Policy;
use crate::rlenv::{BeamEnv, Observation};
use crate::seed::stream_rng;
use crate::{Error, Result};

/// Exploration draws use their own stream, never the environment's.
const EXPLORATION_STREAM: u64 = 0x4578_706c_6f72_6521;

fn default_alpha() -> f64 {
    0.1
}
fn default_epsilon_start() -> f64 {
    1.0
}
fn default_epsilon_end() -> f64 {
    0.05
}
fn default_decay_fraction() -> f64 {
    0.5
}
fn default_bins() -> usize {
    128
}
fn default_theta_range() -> [f64; 2] {
    [-90.0, 90.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearningConfig {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default = "default_epsilon_start")]
    pub epsilon_start: f64,
    #[serde(default = "default_epsilon_end")]
    pub epsilon_end: f64,
    /// Fraction of all training steps over which epsilon decays linearly.
    #[serde(default = "default_decay_fraction")]
    pub decay_fraction: f64,
    #[serde(default)]
    pub episodes: usize,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_theta_range")]
    pub theta_range_deg: [f64; 2],
}

impl Default for LearningConfig {
    fn default() -> Self {
        Self {
            alpha: default_alpha(),
            gamma: 0.0,
            epsilon_start: default_epsilon_start(),
            epsilon_end: default_epsilon_end(),
            decay_fraction: default_decay_fraction(),
            episodes: 0,
            bins: default_bins(),
            theta_range_deg: default_theta_range(),
        }
    }
}

impl LearningConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::LearningConfig("alpha must lie in (0, 1]"));
        }
        if !unit(self.gamma) {
            return Err(Error::LearningConfig("gamma must lie in [0, 1]"));
        }
        if !unit(self.epsilon_start) || !unit(self.epsilon_end) {
            return Err(Error::LearningConfig("epsilon bounds must lie in [0, 1]"));
        }
        if !unit(self.decay_fraction) {
            return Err(Error::LearningConfig("decay_fraction must lie in [0, 1]"));
        }
        if self.bins == 0 {
            return Err(Error::LearningConfig("bins must be at least 1"));
        }
        let [lo, hi] = self.theta_range_deg;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::LearningConfig("theta_range_deg must be an increasing interval"));
        }
        Ok(())
    }

    /// Linear decay from `epsilon_start` to `epsilon_end` over the first
    /// `decay_fraction` of `total` steps, constant afterwards.
    pub fn epsilon(&self, step: usize, total: usize) -> f64 {
        let decay_steps = self.decay_fraction * total as f64;
        if decay_steps <= 0.0 {
            return self.epsilon_end;
        }
        let frac = (step as f64 / decay_steps).min(1.0);
        self.epsilon_start + (self.epsilon_end - self.epsilon_start) * frac
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct QTableData {
    bins: usize,
    theta_range_deg: [f64; 2],
    num_actions: usize,
    values: Vec<Vec<f64>>,
    #[serde(default)]
    visit_counts: Option<Vec<Vec<u64>>>,
}

/// Action values over uniformly quantized elevation bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QTableData", into = "QTableData")]
pub struct QTable {
    bins: usize,
    theta_range_deg: [f64; 2],
    num_actions: usize,
    values: Vec<Vec<f64>>,
    visit_counts: Vec<Vec<u64>>,
}

impl TryFrom<QTableData> for QTable {
    type Error = Error;
    fn try_from(d: QTableData) -> Result<Self> {
        let [lo, hi] = d.theta_range_deg;
        if d.bins == 0 || d.num_actions == 0 || !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::LearningConfig("q-table needs bins, actions and an increasing range"));
        }
        fn shape_ok<T>(m: &[Vec<T>], rows: usize, cols: usize) -> bool {
            m.len() == rows && m.iter().all(|r| r.len() == cols)
        }
        if !shape_ok(&d.values, d.bins, d.num_actions) {
            return Err(Error::LearningConfig("q-table values must be bins x num_actions"));
        }
        if d.values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::LearningConfig("q-table values must be finite"));
        }
        let visit_counts = match d.visit_counts {
            Some(v) => {
                if !shape_ok(&v, d.bins, d.num_actions) {
                    return Err(Error::LearningConfig("q-table visit counts must be bins x num_actions"));
                }
                v
            }
            None => vec![vec![0; d.num_actions]; d.bins],
        };
        Ok(QTable { bins: d.bins, theta_range_deg: d.theta_range_deg, num_actions: d.num_actions, values: d.values, visit_counts })
    }
}

impl From<QTable> for QTableData {
    fn from(q: QTable) -> Self {
        QTableData {
            bins: q.bins,
            theta_range_deg: q.theta_range_deg,
            num_actions: q.num_actions,
            values: q.values,
            visit_counts: Some(q.visit_counts),
        }
    }
}

impl QTable {
    pub fn new(bins: usize, theta_range_deg: [f64; 2], num_actions: usize) -> Self {
        Self {
            bins,
            theta_range_deg,
            num_actions,
            values: vec![vec![0.0; num_actions]; bins],
            visit_counts: vec![vec![0; num_actions]; bins],
        }
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn theta_range_deg(&self) -> [f64; 2] {
        self.theta_range_deg
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    /// Clamped uniform quantization of `theta_deg` over the table's range.
    pub fn bin(&self, theta_deg: f64) -> usize {
        let [lo, hi] = self.theta_range_deg;
        let x = (theta_deg - lo) / (hi - lo) * self.bins as f64;
        if x.is_nan() || x <= 0.0 {
            return 0;
        }
        (libm::floor(x) as usize).min(self.bins - 1)
    }

    pub fn value(&self, bin: usize, action: usize) -> f64 {
        self.values[bin][action]
    }

    pub fn visits(&self, bin: usize, action: usize) -> u64 {
        self.visit_counts[bin][action]
    }

    pub fn row(&self, bin: usize) -> &[f64] {
        &self.values[bin]
    }

    /// Highest-valued action for the bin of `theta_deg`, lowest index on ties.
    pub fn greedy(&self, theta_deg: f64) -> usize {
        let row = self.row(self.bin(theta_deg));
        crate::beamcodec::optimal_index(row).unwrap_or(0)
    }

    fn max_value(&self, theta_deg: f64) -> f64 {
        self.row(self.bin(theta_deg)).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// One temporal-difference update. `theta_next` is `None` at the end of an
/// episode (no bootstrap).
pub fn q_update(
    table: &mut QTable,
    theta_deg: f64,
    action: usize,
    reward: f64,
    theta_next_deg: Option<f64>,
    config: &LearningConfig,
) -> Result<()> {
    if action >= table.num_actions {
        return Err(Error::IndexOutOfRange { index: action, bound: table.num_actions });
    }
    let bootstrap = match theta_next_deg {
        Some(next) if config.gamma > 0.0 => config.gamma * table.max_value(next),
        _ => 0.0,
    };
    let s = table.bin(theta_deg);
    let q = &mut table.values[s][action];
    *q += config.alpha * (reward + bootstrap - *q);
    table.visit_counts[s][action] += 1;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeStats {
    pub episode: usize,
    pub mean_reward: f64,
    /// Exploration rate at the episode's last step.
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub table: QTable,
    pub curve: Vec<EpisodeStats>,
}

/// Epsilon-greedy tabular Q-learning. Training episode `e` runs on
/// environment seed `e`.
pub fn train(env: &mut BeamEnv, config: &LearningConfig) -> Result<TrainOutcome> {
    config.validate()?;
    let mut table = QTable::new(config.bins, config.theta_range_deg, env.num_actions());
    let mut rng = stream_rng(env.config().master_seed, EXPLORATION_STREAM);
    let len = env.episode_len();
    let total = config.episodes * len;
    let mut curve = Vec::with_capacity(config.episodes);
    let mut step = 0;
    for episode in 0..config.episodes {
        let mut obs = env.reset(episode as u64)?;
        let mut sum = 0.0;
        let mut epsilon;
        loop {
            epsilon = config.epsilon(step, total);
            let action = if rng.random::<f64>() < epsilon {
                rng.random_range(0..table.num_actions)
            } else {
                table.greedy(obs.theta_deg)
            };
            let res = env.step(action)?;
            let next = (!res.done).then_some(res.observation.theta_deg);
            q_update(&mut table, obs.theta_deg, action, res.reward, next, config)?;
            sum += res.reward;
            step += 1;
            obs = res.observation;
            if res.done {
                break;
            }
        }
        curve.push(EpisodeStats { episode, mean_reward: sum / len as f64, epsilon });
    }
    Ok(TrainOutcome { table, curve })
}

/// Acts greedily on a trained table.
#[derive(Debug, Clone)]
pub struct GreedyPolicy {
    table: QTable,
}

impl GreedyPolicy {
    pub fn new(table: QTable) -> Self {
        Self { table }
    }

    pub fn table(&self) -> &QTable {
        &self.table
    }
}

impl Policy for GreedyPolicy {
    fn name(&self) -> &str {
        "trained"
    }

    fn act(&mut self, obs: &Observation, env: &mut BeamEnv) -> Result<usize> {
        if self.table.num_actions != env.num_actions() {
            return Err(Error::ShapeMismatch { expected: env.num_actions(), got: self.table.num_actions });
        }
        Ok(self.table.greedy(obs.theta_deg))
    }
}
