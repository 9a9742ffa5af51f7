//! The four CLI commands as library functions.

use std::fs;
use std::path::{Path, PathBuf};

use caviar_core::agents::{evaluate, train, BaselinePolicy, GreedyPolicy, OraclePolicy, Policy, QTable, TrainOutcome};

use crate::config::ExperimentConfig;
use crate::trace::{self, Summary, TraceReport};
use crate::{dataset, CliError};

pub const POLICY_FILE: &str = "policy.json";
pub const CURVE_FILE: &str = "learning_curve.csv";
pub const TRACE_FILE: &str = "trace.csv";
pub const SUMMARY_FILE: &str = "summary.json";

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenerateCounts {
    pub episodes: usize,
    pub scenes: usize,
    pub valid_channels: usize,
}

pub fn cmd_generate(config: &ExperimentConfig, out: &Path) -> Result<GenerateCounts, CliError> {
    let (manifest, episodes) = dataset::generate(config)?;
    dataset::write(out, &manifest, &episodes)?;
    let scenes = episodes.iter().flat_map(|e| &e.scenes);
    Ok(GenerateCounts {
        episodes: episodes.len(),
        scenes: scenes.clone().count(),
        valid_channels: scenes.filter(|s| s.has_valid_channel()).count(),
    })
}

pub fn write_policy(path: &Path, table: &QTable) -> Result<(), CliError> {
    let text = serde_json::to_string(table).expect("q-table serializes");
    fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

pub fn read_policy(path: &Path) -> Result<QTable, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::data(path, e.to_string()))
}

pub fn cmd_train(config: &ExperimentConfig, out: &Path) -> Result<TrainOutcome, CliError> {
    let mut env = config.build_env()?;
    let outcome = train(&mut env, &config.learning)?;
    create_dir(out)?;
    write_policy(&out.join(POLICY_FILE), &outcome.table)?;
    let path = out.join(CURVE_FILE);
    let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::data(&path, e.to_string()))?;
    let io = |e: csv::Error| CliError::data(&path, e.to_string());
    w.write_record(["episode", "mean_reward", "epsilon"]).map_err(io)?;
    for s in &outcome.curve {
        w.write_record([s.episode.to_string(), s.mean_reward.to_string(), s.epsilon.to_string()]).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    Ok(outcome)
}

/// Oracle and baseline always; the trained agent when `policy` is given.
pub fn cmd_evaluate(config: &ExperimentConfig, policy: Option<&Path>, out: &Path) -> Result<Summary, CliError> {
    let env = config.build_env()?;
    let mut trained = match policy {
        Some(p) => {
            let table = read_policy(p)?;
            if table.num_actions() != env.num_actions() {
                return Err(CliError::data(
                    p,
                    format!("policy has {} actions, environment has {}", table.num_actions(), env.num_actions()),
                ));
            }
            Some(GreedyPolicy::new(table))
        }
        None => None,
    };
    let (mut oracle, mut baseline) = (OraclePolicy, BaselinePolicy);
    let mut policies: Vec<&mut dyn Policy> = vec![&mut oracle, &mut baseline];
    if let Some(t) = trained.as_mut() {
        policies.push(t);
    }
    let report = evaluate(&env, &mut policies, &config.evaluation.seed_list())?;
    create_dir(out)?;
    trace::write_trace(&out.join(TRACE_FILE), &report)?;
    let summary = Summary::new(&config.name, &config.digest(), &report);
    trace::write_summary(&out.join(SUMMARY_FILE), &summary)?;
    Ok(summary)
}

/// Accepts a trace file or a directory holding `trace.csv`.
pub fn cmd_report(path: &Path) -> Result<Option<TraceReport>, CliError> {
    let path: PathBuf = if path.is_dir() { path.join(TRACE_FILE) } else { path.to_path_buf() };
    Ok(trace::report(&trace::read_trace(&path)?))
}
