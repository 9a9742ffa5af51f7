//! Scene geometry: base station, obstacle boxes, angular NLOS masks, the
//! scripted UAV trajectory and line-of-sight tests.

mod trajectory;

use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use trajectory::{trajectory_state, FlightPhase, PhaseKind, TrajectoryPlan, UavState};

/// A point or displacement in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.x * self.x + self.y * self.y + self.z * self.z)
    }

    pub fn horizontal_norm(&self) -> f64 {
        libm::hypot(self.x, self.y)
    }

    fn axis(&self, i: usize) -> f64 {
        match i {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from([x, y, z]: [f64; 3]) -> Self {
        Self { x, y, z }
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Axis-aligned obstacle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObstacleBox {
    #[serde(rename = "min")]
    pub min_corner: Vec3,
    #[serde(rename = "max")]
    pub max_corner: Vec3,
}

impl ObstacleBox {
    pub fn new(min_corner: Vec3, max_corner: Vec3) -> Self {
        Self { min_corner, max_corner }
    }

    fn is_well_formed(&self) -> bool {
        self.min_corner.x <= self.max_corner.x
            && self.min_corner.y <= self.max_corner.y
            && self.min_corner.z <= self.max_corner.z
    }

    fn contains_strictly(&self, p: Vec3) -> bool {
        (0..3).all(|i| self.min_corner.axis(i) < p.axis(i) && p.axis(i) < self.max_corner.axis(i))
    }

    /// Slab test against the open segment `from -> to`. Touching a face or
    /// edge counts as an intersection.
    pub fn blocks_segment(&self, from: Vec3, to: Vec3) -> bool {
        let dir = to - from;
        let mut t_enter = f64::NEG_INFINITY;
        let mut t_exit = f64::INFINITY;
        for i in 0..3 {
            let o = from.axis(i);
            let d = dir.axis(i);
            let (lo, hi) = (self.min_corner.axis(i), self.max_corner.axis(i));
            if d == 0.0 {
                if o < lo || o > hi {
                    return false;
                }
                continue;
            }
            let (mut t0, mut t1) = ((lo - o) / d, (hi - o) / d);
            if t0 > t1 {
                core::mem::swap(&mut t0, &mut t1);
            }
            t_enter = t_enter.max(t0);
            t_exit = t_exit.min(t1);
        }
        t_enter <= t_exit && t_exit > 0.0 && t_enter < 1.0
    }
}

/// Closed elevation interval in degrees inside which the link is forced NLOS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct AngleMask {
    pub lo_deg: f64,
    pub hi_deg: f64,
}

impl AngleMask {
    pub fn contains(&self, deg: f64) -> bool {
        self.lo_deg <= deg && deg <= self.hi_deg
    }
}

impl From<[f64; 2]> for AngleMask {
    fn from([lo_deg, hi_deg]: [f64; 2]) -> Self {
        Self { lo_deg, hi_deg }
    }
}

impl From<AngleMask> for [f64; 2] {
    fn from(m: AngleMask) -> Self {
        [m.lo_deg, m.hi_deg]
    }
}

/// Unvalidated scene description as it appears in config files.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub bs_position: Vec3,
    #[serde(default)]
    pub obstacles: Vec<ObstacleBox>,
    #[serde(default, rename = "nlos_angle_masks_deg")]
    pub nlos_angle_masks: Vec<AngleMask>,
}

/// A validated, immutable scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SceneConfig", into = "SceneConfig")]
pub struct Scene {
    bs_position: Vec3,
    obstacles: Vec<ObstacleBox>,
    nlos_angle_masks: Vec<AngleMask>,
}

impl Scene {
    pub fn bs_position(&self) -> Vec3 {
        self.bs_position
    }

    pub fn obstacles(&self) -> &[ObstacleBox] {
        &self.obstacles
    }

    pub fn nlos_angle_masks(&self) -> &[AngleMask] {
        &self.nlos_angle_masks
    }

    /// Whether the link from the scene's base station to `uav` is blocked.
    pub fn blocks(&self, uav: Vec3) -> bool {
        los_blocked(self, self.bs_position, uav)
    }
}

impl TryFrom<SceneConfig> for Scene {
    type Error = Error;
    fn try_from(c: SceneConfig) -> Result<Self> {
        build_scene(c)
    }
}

impl From<Scene> for SceneConfig {
    fn from(s: Scene) -> Self {
        SceneConfig {
            bs_position: s.bs_position,
            obstacles: s.obstacles,
            nlos_angle_masks: s.nlos_angle_masks,
        }
    }
}

pub fn build_scene(config: SceneConfig) -> Result<Scene> {
    if !config.bs_position.is_finite() {
        return Err(Error::NonFinite("bs_position"));
    }
    for (index, b) in config.obstacles.iter().enumerate() {
        if !b.min_corner.is_finite() || !b.max_corner.is_finite() {
            return Err(Error::NonFinite("obstacles"));
        }
        if !b.is_well_formed() {
            return Err(Error::InvertedBox { index });
        }
        if b.contains_strictly(config.bs_position) {
            return Err(Error::BsInsideObstacle { index });
        }
    }
    for (index, m) in config.nlos_angle_masks.iter().enumerate() {
        if m.lo_deg.is_nan() || m.hi_deg.is_nan() || m.lo_deg > m.hi_deg {
            return Err(Error::InvertedMask { index, lo: m.lo_deg, hi: m.hi_deg });
        }
    }
    Ok(Scene {
        bs_position: config.bs_position,
        obstacles: config.obstacles,
        nlos_angle_masks: config.nlos_angle_masks,
    })
}

/// Elevation of `uav` seen from `bs`, in radians within [-pi/2, pi/2].
pub fn bs_to_uav_angle(bs: Vec3, uav: Vec3) -> Result<f64> {
    let d = uav - bs;
    if d.x == 0.0 && d.y == 0.0 && d.z == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    Ok(libm::atan2(d.z, d.horizontal_norm()))
}

/// Line-of-sight test: any box touching the open segment, or the elevation
/// falling inside a configured mask, blocks the link.
pub fn los_blocked(scene: &Scene, bs: Vec3, uav: Vec3) -> bool {
    let Ok(theta) = bs_to_uav_angle(bs, uav) else {
        return false;
    };
    let deg = theta.to_degrees();
    scene.nlos_angle_masks.iter().any(|m| m.contains(deg))
        || scene.obstacles.iter().any(|b| b.blocks_segment(bs, uav))
}

impl core::fmt::Display for Vec3 {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}
