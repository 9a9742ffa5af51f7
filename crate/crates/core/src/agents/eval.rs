use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::Policy;
use crate::rlenv::BeamEnv;
use crate::Result;

/// One time step of one evaluation seed.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub seed: u64,
    pub t: usize,
    pub theta_deg: f64,
    pub los: bool,
    /// Best magnitude over all beam pairs.
    pub optimum: f64,
    /// Indexed like [`EvalReport::policies`].
    pub actions: Vec<usize>,
    pub rewards: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicySummary {
    pub name: String,
    pub mean: f64,
    /// `None` when no step falls in the class.
    pub mean_los: Option<f64>,
    pub mean_nlos: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub policies: Vec<String>,
    pub seeds: Vec<u64>,
    pub rows: Vec<TraceRow>,
    pub optimum: PolicySummary,
    pub summaries: Vec<PolicySummary>,
    /// Smallest optimum over every step of every seed.
    pub min_optimum: f64,
    /// Smallest per-step optimum after averaging across seeds.
    pub min_mean_optimum: f64,
}

impl EvalReport {
    pub fn summary(&self, name: &str) -> Option<&PolicySummary> {
        self.summaries.iter().find(|s| s.name == name)
    }
}

fn summarize(name: &str, rows: &[TraceRow], value: impl Fn(&TraceRow) -> f64) -> PolicySummary {
    let mean_of = |filter: &dyn Fn(&TraceRow) -> bool| {
        let (sum, n) = rows.iter().filter(|r| filter(r)).fold((0.0, 0usize), |(s, n), r| (s + value(r), n + 1));
        (n > 0).then(|| sum / n as f64)
    };
    PolicySummary {
        name: String::from(name),
        mean: mean_of(&|_| true).unwrap_or(0.0),
        mean_los: mean_of(&|r| r.los),
        mean_nlos: mean_of(&|r| !r.los),
    }
}

/// Runs every policy on the same channel realizations: one environment per
/// seed, each policy picks an action from the same observation, and each
/// is credited the magnitude of its own pick. Exogenous dynamics make this
/// identical to giving each policy its own identically seeded copy.
pub fn evaluate(env: &BeamEnv, policies: &mut [&mut dyn Policy], seeds: &[u64]) -> Result<EvalReport> {
    let names: Vec<String> = policies.iter().map(|p| String::from(p.name())).collect();
    let mut env = env.clone();
    let mut rows = Vec::with_capacity(seeds.len() * env.episode_len());
    let mut step_sums = vec![0.0; env.episode_len()];
    for &seed in seeds {
        let mut obs = env.reset(seed)?;
        loop {
            let mut actions = Vec::with_capacity(policies.len());
            for p in policies.iter_mut() {
                actions.push(p.act(&obs, &mut env)?);
            }
            let res = env.step(actions.first().copied().unwrap_or(0))?;
            let info = &res.info;
            let optimum = info.magnitudes[info.best_index];
            step_sums[info.scene_id] += optimum;
            rows.push(TraceRow {
                seed,
                t: info.scene_id,
                theta_deg: info.theta_deg,
                los: info.los,
                optimum,
                rewards: actions.iter().map(|&a| info.magnitudes[a]).collect(),
                actions,
            });
            obs = res.observation;
            if res.done {
                break;
            }
        }
    }
    let summaries = names.iter().enumerate().map(|(i, n)| summarize(n, &rows, |r| r.rewards[i])).collect();
    let min_optimum = rows.iter().map(|r| r.optimum).fold(f64::INFINITY, f64::min);
    let min_mean_optimum = if seeds.is_empty() {
        f64::INFINITY
    } else {
        step_sums.iter().map(|s| s / seeds.len() as f64).fold(f64::INFINITY, f64::min)
    };
    Ok(EvalReport {
        optimum: summarize("optimum", &rows, |r| r.optimum),
        policies: names,
        seeds: seeds.to_vec(),
        rows,
        summaries,
        min_optimum,
        min_mean_optimum,
    })
}
