use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::Vec3;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseKind {
    Takeoff,
    Cruise,
    Land,
}

/// One straight-line leg of the flight, traversed at constant speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlightPhase {
    pub name: PhaseKind,
    /// Number of discrete steps spent on this leg.
    pub duration: usize,
    pub start: Vec3,
    pub end: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanConfig {
    phases: Vec<FlightPhase>,
}

/// Piecewise-linear flight plan. Starts with a takeoff from the ground and
/// ends with a landing; consecutive legs share their endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PlanConfig", into = "PlanConfig")]
pub struct TrajectoryPlan {
    phases: Vec<FlightPhase>,
    total_steps: usize,
}

impl TrajectoryPlan {
    pub fn new(phases: Vec<FlightPhase>) -> Result<Self> {
        let (Some(first), Some(last)) = (phases.first(), phases.last()) else {
            return Err(Error::Trajectory("no phases"));
        };
        if first.name != PhaseKind::Takeoff {
            return Err(Error::Trajectory("first phase must be a takeoff"));
        }
        if last.name != PhaseKind::Land {
            return Err(Error::Trajectory("last phase must be a landing"));
        }
        for (index, p) in phases.iter().enumerate() {
            if p.duration == 0 {
                return Err(Error::Phase { index, reason: "duration must be positive" });
            }
            if !p.start.is_finite() || !p.end.is_finite() {
                return Err(Error::Phase { index, reason: "non-finite pose" });
            }
            if p.name == PhaseKind::Takeoff && p.start.z != 0.0 {
                return Err(Error::Phase { index, reason: "takeoff must start at altitude 0" });
            }
            if p.name == PhaseKind::Land && p.end.z != 0.0 {
                return Err(Error::Phase { index, reason: "landing must end at altitude 0" });
            }
            if let Some(next) = phases.get(index + 1) {
                if p.end != next.start {
                    return Err(Error::Phase { index, reason: "end pose differs from next start pose" });
                }
            }
        }
        let total_steps = phases.iter().map(|p| p.duration).sum();
        Ok(Self { phases, total_steps })
    }

    pub fn phases(&self) -> &[FlightPhase] {
        &self.phases
    }

    /// S, the sum of all phase durations.
    pub fn total_steps(&self) -> usize {
        self.total_steps
    }

    /// Largest per-step displacement over all legs.
    pub fn max_step_length(&self) -> f64 {
        self.phases
            .iter()
            .map(|p| (p.end - p.start).norm() / p.duration as f64)
            .fold(0.0, f64::max)
    }
}

impl TryFrom<PlanConfig> for TrajectoryPlan {
    type Error = Error;
    fn try_from(c: PlanConfig) -> Result<Self> {
        TrajectoryPlan::new(c.phases)
    }
}

impl From<TrajectoryPlan> for PlanConfig {
    fn from(p: TrajectoryPlan) -> Self {
        PlanConfig { phases: p.phases }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UavState {
    /// Time index, clamped to S.
    pub t: usize,
    pub position: Vec3,
    pub phase: PhaseKind,
}

/// Pose at discrete time `t`. Times past the end of the plan hold the final
/// landing pose.
pub fn trajectory_state(plan: &TrajectoryPlan, t: usize) -> UavState {
    let mut phase_start = 0;
    for p in &plan.phases {
        if t < phase_start + p.duration {
            let frac = (t - phase_start) as f64 / p.duration as f64;
            return UavState { t, position: p.start + (p.end - p.start) * frac, phase: p.name };
        }
        phase_start += p.duration;
    }
    // Constructor guarantees a trailing landing phase.
    let last = plan.phases[plan.phases.len() - 1];
    UavState { t: plan.total_steps, position: last.end, phase: last.name }
}
