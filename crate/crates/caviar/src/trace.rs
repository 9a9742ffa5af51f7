//! Per-step evaluation traces (`trace.csv`), summaries (`summary.json`) and
//! the text report built from a trace.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use caviar_core::agents::{EvalReport, PolicySummary};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Means {
    pub name: String,
    pub mean: f64,
    pub mean_los: Option<f64>,
    pub mean_nlos: Option<f64>,
}

impl From<&PolicySummary> for Means {
    fn from(s: &PolicySummary) -> Self {
        Means { name: s.name.clone(), mean: s.mean, mean_los: s.mean_los, mean_nlos: s.mean_nlos }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub name: String,
    pub config_digest: String,
    pub seeds: Vec<u64>,
    pub steps: usize,
    pub nlos_steps: usize,
    pub optimum: Means,
    pub policies: Vec<Means>,
    pub min_optimum: f64,
    pub min_mean_optimum: f64,
}

impl Summary {
    pub fn new(name: &str, digest: &str, report: &EvalReport) -> Self {
        Summary {
            name: name.to_string(),
            config_digest: digest.to_string(),
            seeds: report.seeds.clone(),
            steps: report.rows.len(),
            nlos_steps: report.rows.iter().filter(|r| !r.los).count(),
            optimum: (&report.optimum).into(),
            policies: report.summaries.iter().map(Means::from).collect(),
            min_optimum: report.min_optimum,
            min_mean_optimum: report.min_mean_optimum,
        }
    }
}

pub fn write_summary(path: &Path, summary: &Summary) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(summary).expect("summary serializes");
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::data(path, format!("{other:?}")),
    }
}

/// Columns: seed, t, theta_deg, los (1/0), then `reward_<policy>` and
/// `action_<policy>` for each policy, then optimum.
pub fn write_trace(path: &Path, report: &EvalReport) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut header = vec!["seed".to_string(), "t".into(), "theta_deg".into(), "los".into()];
    for p in &report.policies {
        header.push(format!("reward_{p}"));
        header.push(format!("action_{p}"));
    }
    header.push("optimum".into());
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for r in &report.rows {
        let mut rec = vec![r.seed.to_string(), r.t.to_string(), r.theta_deg.to_string(), u8::from(r.los).to_string()];
        for (reward, action) in r.rewards.iter().zip(&r.actions) {
            rec.push(reward.to_string());
            rec.push(action.to_string());
        }
        rec.push(r.optimum.to_string());
        w.write_record(&rec).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub seed: u64,
    pub t: usize,
    pub theta_deg: f64,
    pub los: bool,
    pub rewards: Vec<f64>,
    pub optimum: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub policies: Vec<String>,
    pub steps: Vec<TraceStep>,
}

pub fn read_trace(path: &Path) -> Result<Trace, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = r.headers().map_err(|e| csv_err(path, e))?.clone();
    let col = |name: &str| {
        header.iter().position(|h| h == name).ok_or_else(|| CliError::data(path, format!("missing column `{name}`")))
    };
    let (seed_c, t_c, theta_c, los_c, opt_c) = (col("seed")?, col("t")?, col("theta_deg")?, col("los")?, col("optimum")?);
    let reward_cols: Vec<(String, usize)> = header
        .iter()
        .enumerate()
        .filter_map(|(i, h)| h.strip_prefix("reward_").map(|p| (p.to_string(), i)))
        .collect();
    let mut steps = Vec::new();
    for (n, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = n + 2;
        fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, path: &Path, line: usize) -> Result<T, CliError> {
            let raw = rec.get(i).unwrap_or("");
            raw.trim().parse().map_err(|_| CliError::data(path, format!("line {line}: cannot parse `{raw}`")))
        }
        let los: u8 = field(&rec, los_c, path, line)?;
        steps.push(TraceStep {
            seed: field(&rec, seed_c, path, line)?,
            t: field(&rec, t_c, path, line)?,
            theta_deg: field(&rec, theta_c, path, line)?,
            los: los != 0,
            rewards: reward_cols.iter().map(|&(_, i)| field(&rec, i, path, line)).collect::<Result<_, _>>()?,
            optimum: field(&rec, opt_c, path, line)?,
        });
    }
    Ok(Trace { policies: reward_cols.into_iter().map(|(p, _)| p).collect(), steps })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceReport {
    pub steps: usize,
    pub seeds: usize,
    pub optimum_mean: f64,
    pub policy_means: Vec<(String, f64)>,
    /// Inclusive `t` ranges where some seed saw a blocked link.
    pub nlos_windows: Vec<(usize, usize)>,
    pub min_optimum: f64,
    pub min_mean_optimum: f64,
}

/// `None` for a trace without steps.
pub fn report(trace: &Trace) -> Option<TraceReport> {
    let n = trace.steps.len();
    if n == 0 {
        return None;
    }
    let mean = |f: &dyn Fn(&TraceStep) -> f64| trace.steps.iter().map(f).sum::<f64>() / n as f64;
    let mut per_t: BTreeMap<usize, (f64, usize, bool)> = BTreeMap::new();
    for s in &trace.steps {
        let e = per_t.entry(s.t).or_insert((0.0, 0, false));
        e.0 += s.optimum;
        e.1 += 1;
        e.2 |= !s.los;
    }
    let mut windows: Vec<(usize, usize)> = Vec::new();
    for (&t, &(_, _, nlos)) in &per_t {
        if !nlos {
            continue;
        }
        match windows.last_mut() {
            Some(w) if w.1 + 1 == t => w.1 = t,
            _ => windows.push((t, t)),
        }
    }
    let mut seeds: Vec<u64> = trace.steps.iter().map(|s| s.seed).collect();
    seeds.sort_unstable();
    seeds.dedup();
    Some(TraceReport {
        steps: n,
        seeds: seeds.len(),
        optimum_mean: mean(&|s| s.optimum),
        policy_means: trace.policies.iter().enumerate().map(|(i, p)| (p.clone(), mean(&|s| s.rewards[i]))).collect(),
        nlos_windows: windows,
        min_optimum: trace.steps.iter().map(|s| s.optimum).fold(f64::INFINITY, f64::min),
        min_mean_optimum: per_t.values().map(|&(sum, k, _)| sum / k as f64).fold(f64::INFINITY, f64::min),
    })
}

impl fmt::Display for TraceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "steps: {} over {} seed(s)", self.steps, self.seeds)?;
        writeln!(f, "mean optimum: {:.4}", self.optimum_mean)?;
        for (p, m) in &self.policy_means {
            writeln!(f, "mean reward {p}: {m:.4}")?;
        }
        write!(f, "NLOS windows: {}", self.nlos_windows.len())?;
        for (a, b) in &self.nlos_windows {
            write!(f, " [{a}, {b}]")?;
        }
        writeln!(f)?;
        writeln!(f, "min optimum: {:.4}", self.min_optimum)?;
        write!(f, "min seed-averaged optimum: {:.4}", self.min_mean_optimum)
    }
}
