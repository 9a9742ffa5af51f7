//! Stepwise beam-selection environment.
//!
//! The observation is the BS-to-UAV elevation, the action a flattened beam
//! pair index and the reward the equivalent-channel magnitude of that pair.
//! Dynamics are exogenous: the trajectory is scripted and channel draws are
//! consumed in a fixed order (pose, LOS test, paths), so the sequence of
//! observations and channels depends only on the seeds, never on actions.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;

use crate::beamcodec::{dft_codebook, equivalent_magnitudes, Codebook, EquivalentMagnitudes};
use crate::channel::{draw_multipath, ChannelParams};
use crate::episodes::{channel_from_records, record_scene, PathRecord, RecordContext, SceneRecord};
use crate::seed::stream_rng;
use crate::world::{bs_to_uav_angle, trajectory_state, Scene, TrajectoryPlan, UavState, Vec3};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EnvConfig {
    pub scene: Scene,
    pub trajectory: TrajectoryPlan,
    pub channel: ChannelParams,
    pub n_t: usize,
    pub n_r: usize,
    /// Steps per episode; `None` flies the whole plan once.
    pub episode_len: Option<usize>,
    /// Sampling period between scenes, seconds.
    pub t_sam: f64,
    pub top_k: usize,
    pub master_seed: u64,
}

impl EnvConfig {
    pub fn episode_len(&self) -> usize {
        self.episode_len.unwrap_or(self.trajectory.total_steps())
    }

    pub fn num_pairs(&self) -> usize {
        self.n_t * self.n_r
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_t == 0 || self.n_r == 0 {
            return Err(Error::ZeroAntennas);
        }
        if self.episode_len() == 0 {
            return Err(Error::EnvConfig("episode length must be at least 1"));
        }
        if !(self.t_sam.is_finite() && self.t_sam > 0.0) {
            return Err(Error::EnvConfig("t_sam must be positive"));
        }
        if self.top_k == 0 {
            return Err(Error::EnvConfig("top_k must be at least 1"));
        }
        self.channel.validate()?;
        let bs = self.scene.bs_position();
        for t in 0..=self.episode_len() {
            if trajectory_state(&self.trajectory, t).position == bs {
                return Err(Error::EnvConfig("trajectory passes through the base station"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub t: usize,
    pub theta_deg: f64,
    pub uav_position: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub info: SceneRecord,
}

#[derive(Debug, Clone)]
struct PendingScene {
    state: UavState,
    paths: Vec<PathRecord>,
    magnitudes: EquivalentMagnitudes,
}

#[derive(Debug, Clone)]
struct Episode {
    id: u64,
    rng: ChaCha8Rng,
    t: usize,
    pending: Option<PendingScene>,
    done: bool,
}

#[derive(Debug, Clone)]
pub struct BeamEnv {
    config: EnvConfig,
    c_t: Codebook,
    c_r: Codebook,
    episode: Option<Episode>,
}

impl BeamEnv {
    pub fn new(config: EnvConfig) -> Result<Self> {
        config.validate()?;
        let c_t = dft_codebook(config.n_t)?;
        let c_r = dft_codebook(config.n_r)?;
        Ok(Self { config, c_t, c_r, episode: None })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn transmit_codebook(&self) -> &Codebook {
        &self.c_t
    }

    pub fn receive_codebook(&self) -> &Codebook {
        &self.c_r
    }

    pub fn num_actions(&self) -> usize {
        self.config.num_pairs()
    }

    pub fn episode_len(&self) -> usize {
        self.config.episode_len()
    }

    /// Current time index, if an episode is running.
    pub fn time(&self) -> Option<usize> {
        self.episode.as_ref().map(|e| e.t)
    }

    fn observe(&self, t: usize) -> Result<Observation> {
        let state = trajectory_state(&self.config.trajectory, t);
        let theta = bs_to_uav_angle(self.config.scene.bs_position(), state.position)?;
        Ok(Observation { t, theta_deg: theta.to_degrees(), uav_position: state.position })
    }

    /// Starts episode `seed`; its random stream is derived from the master
    /// seed and `seed`. The first channel is drawn lazily.
    pub fn reset(&mut self, seed: u64) -> Result<Observation> {
        self.episode = Some(Episode {
            id: seed,
            rng: stream_rng(self.config.master_seed, seed),
            t: 0,
            pending: None,
            done: false,
        });
        self.observe(0)
    }

    fn draw_pending(&mut self) -> Result<()> {
        let episode = self.episode.as_mut().ok_or(Error::NotReset)?;
        if episode.done {
            return Err(Error::EpisodeDone);
        }
        if episode.pending.is_some() {
            return Ok(());
        }
        let state = trajectory_state(&self.config.trajectory, episode.t);
        let theta = bs_to_uav_angle(self.config.scene.bs_position(), state.position)?;
        let blocked = self.config.scene.blocks(state.position);
        let drawn = draw_multipath(&mut episode.rng, theta, blocked, &self.config.channel);
        let paths: Vec<PathRecord> = drawn.iter().map(PathRecord::from).collect();
        let h = channel_from_records(&paths, self.config.n_t, self.config.n_r)?;
        let magnitudes = equivalent_magnitudes(&h, &self.c_t, &self.c_r)?;
        episode.pending = Some(PendingScene { state, paths, magnitudes });
        Ok(())
    }

    /// All beam-pair magnitudes of the current step. Privileged: only the
    /// oracle policy looks at this. Does not change what the step draws.
    pub fn ground_truth(&mut self) -> Result<&EquivalentMagnitudes> {
        self.draw_pending()?;
        let pending = self.episode.as_ref().and_then(|e| e.pending.as_ref()).ok_or(Error::NotReset)?;
        Ok(&pending.magnitudes)
    }

    pub fn step(&mut self, action: usize) -> Result<StepResult> {
        let m = self.num_actions();
        if action >= m {
            return Err(Error::IndexOutOfRange { index: action, bound: m });
        }
        self.draw_pending()?;
        let len = self.episode_len();
        let episode = self.episode.as_mut().ok_or(Error::NotReset)?;
        let PendingScene { state, paths, magnitudes } = episode.pending.take().ok_or(Error::NotReset)?;
        let t = episode.t;
        let ctx = RecordContext {
            episode_id: episode.id,
            t_sam: self.config.t_sam,
            n_t: self.config.n_t,
            n_r: self.config.n_r,
            top_k: self.config.top_k,
        };
        let reward = magnitudes.values()[action];
        let info = record_scene(&ctx, t, &state, &self.config.scene, paths, &magnitudes)?;
        episode.t = t + 1;
        episode.done = episode.t >= len;
        let done = episode.done;
        let observation = self.observe(t + 1)?;
        Ok(StepResult { observation, reward, done, info })
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::world::{build_scene, AngleMask, FlightPhase, PhaseKind, SceneConfig};
    use alloc::vec;

    pub(crate) fn small_config(masks: Vec<AngleMask>, channel: ChannelParams) -> EnvConfig {
        let leg = |name, duration, s: [f64; 3], e: [f64; 3]| FlightPhase { name, duration, start: s.into(), end: e.into() };
        EnvConfig {
            scene: build_scene(SceneConfig { bs_position: Vec3::default(), obstacles: vec![], nlos_angle_masks: masks })
                .unwrap(),
            trajectory: TrajectoryPlan::new(vec![
                leg(PhaseKind::Takeoff, 10, [20.0, 0.0, 0.0], [20.0, 0.0, 30.0]),
                leg(PhaseKind::Cruise, 20, [20.0, 0.0, 30.0], [80.0, 0.0, 30.0]),
                leg(PhaseKind::Land, 10, [80.0, 0.0, 30.0], [80.0, 0.0, 0.0]),
            ])
            .unwrap(),
            channel,
            n_t: 16,
            n_r: 1,
            episode_len: None,
            t_sam: 0.1,
            top_k: 3,
            master_seed: 11,
        }
    }

    #[test]
    fn reset_starts_at_zero_with_plan_start_angle() {
        let mut env = BeamEnv::new(small_config(vec![], ChannelParams::default())).unwrap();
        let obs = env.reset(4).unwrap();
        assert_eq!(obs.t, 0);
        assert_eq!(env.time(), Some(0));
        assert_eq!(obs.theta_deg, 0.0);
        assert_eq!(obs.uav_position, Vec3::new(20.0, 0.0, 0.0));
    }

    #[test]
    fn same_seed_same_rewards() {
        let mut env = BeamEnv::new(small_config(vec![AngleMask::from([20.0, 30.0])], ChannelParams::default())).unwrap();
        let run = |env: &mut BeamEnv| {
            let o = env.reset(7).unwrap();
            let mut out = vec![o.theta_deg];
            for k in 0..env.episode_len() {
                let r = env.step(k % 16).unwrap();
                out.push(r.reward);
                out.push(r.observation.theta_deg);
            }
            out
        };
        let a = run(&mut env);
        let b = run(&mut env);
        assert_eq!(a, b);
    }

    #[test]
    fn termination_and_errors() {
        let mut env = BeamEnv::new(small_config(vec![], ChannelParams::default())).unwrap();
        assert_eq!(env.step(0).unwrap_err(), Error::NotReset);
        env.reset(0).unwrap();
        assert!(matches!(env.step(16), Err(Error::IndexOutOfRange { .. })));
        let len = env.episode_len();
        let mut dones = 0;
        for t in 0..len {
            let r = env.step(0).unwrap();
            assert_eq!(r.done, t + 1 == len);
            assert_eq!(r.info.scene_id, t);
            dones += r.done as usize;
        }
        assert_eq!(dones, 1);
        assert_eq!(env.step(0).unwrap_err(), Error::EpisodeDone);
    }

    #[test]
    fn peeking_does_not_change_the_draw() {
        let mut a = BeamEnv::new(small_config(vec![], ChannelParams::default())).unwrap();
        let mut b = a.clone();
        a.reset(2).unwrap();
        b.reset(2).unwrap();
        for _ in 0..5 {
            let best = a.ground_truth().unwrap().best_index();
            let ra = a.step(best).unwrap();
            let rb = b.step(best).unwrap();
            assert_eq!(ra, rb);
            assert_eq!(ra.reward, ra.info.magnitudes[ra.info.best_index]);
        }
    }

    #[test]
    fn reward_is_bounded_by_optimum() {
        let mut env = BeamEnv::new(small_config(vec![AngleMask::from([20.0, 30.0])], ChannelParams::default())).unwrap();
        env.reset(1).unwrap();
        for t in 0..env.episode_len() {
            let r = env.step((t * 5) % 16).unwrap();
            assert!(r.reward >= 0.0 && r.reward <= r.info.magnitudes[r.info.best_index]);
        }
    }

    #[test]
    fn single_path_blocked_gives_zero_channel() {
        let params = ChannelParams { num_paths: 1, ..Default::default() };
        let mut env = BeamEnv::new(small_config(vec![AngleMask::from([-90.0, 90.0])], params)).unwrap();
        env.reset(0).unwrap();
        let r = env.step(3).unwrap();
        assert!(r.info.paths.is_empty());
        assert_eq!(r.reward, 0.0);
        assert_eq!(r.info.best_index, 0);
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut c = small_config(vec![], ChannelParams::default());
        c.n_t = 0;
        assert!(BeamEnv::new(c).is_err());
        let mut c = small_config(vec![], ChannelParams::default());
        c.t_sam = 0.0;
        assert!(BeamEnv::new(c).is_err());
        let mut c = small_config(vec![], ChannelParams::default());
        c.episode_len = Some(0);
        assert!(BeamEnv::new(c).is_err());
    }
}
