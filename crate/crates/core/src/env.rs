use std::fmt::Debug;

use crate::error::{EnvError, Result};
use crate::rng::RngStream;
use crate::spaces::{ActionMask, Capabilities, ObservabilityLevel, StepResult};

/// Reward and episode-end flags of a single transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub reward: f64,
    pub terminated: bool,
    pub truncated: bool,
}

impl Transition {
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

/// A discrete-action partially observable environment.
///
/// The implementing value is the immutable configuration; all mutable episode
/// data lives in `State`, so one configuration can drive many instances.
/// All randomness flows through the `RngStream` passed to `reset` and `step`.
pub trait Environment: Send + Sync {
    type State: Clone + Debug + Send + Sync;

    fn id(&self) -> String;
    fn num_actions(&self) -> usize;
    fn levels(&self) -> &[ObservabilityLevel];
    /// Observation length for `level`. Must not depend on the state.
    fn raw_obs_dim(&self, level: ObservabilityLevel) -> usize;
    fn gamma(&self) -> f64;
    fn max_steps(&self) -> usize;
    fn reward_range(&self) -> (f64, f64);

    fn reset(&self, rng: &mut RngStream) -> Self::State;

    /// Advance one step. Calling this on a finished episode is a contract error.
    fn step(&self, state: &mut Self::State, action: usize, rng: &mut RngStream) -> Result<Transition>;

    /// Write the observation for a supported `level` into `out`
    /// (`out.len() == raw_obs_dim(level)`).
    fn write_obs(&self, state: &Self::State, level: ObservabilityLevel, out: &mut [f32]);

    fn write_mask(&self, state: &Self::State, out: &mut [bool]);

    fn supports(&self, level: ObservabilityLevel) -> bool {
        self.levels().contains(&level)
    }

    fn check_level(&self, level: ObservabilityLevel) -> Result<()> {
        if self.supports(level) {
            Ok(())
        } else {
            Err(EnvError::Capability {
                env: self.id(),
                level,
            })
        }
    }

    fn obs_dim(&self, level: ObservabilityLevel) -> Result<usize> {
        self.check_level(level)?;
        Ok(self.raw_obs_dim(level))
    }

    fn observe(&self, state: &Self::State, level: ObservabilityLevel) -> Result<Vec<f32>> {
        let mut out = vec![0.0; self.obs_dim(level)?];
        self.write_obs(state, level, &mut out);
        Ok(out)
    }

    fn action_mask(&self, state: &Self::State) -> ActionMask {
        let mut m = vec![false; self.num_actions()];
        self.write_mask(state, &mut m);
        ActionMask(m)
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            id: self.id(),
            levels: self.levels().to_vec(),
            obs_dims: self
                .levels()
                .iter()
                .map(|&l| (l, self.raw_obs_dim(l)))
                .collect(),
            num_actions: self.num_actions(),
            reward_range: self.reward_range(),
            gamma: self.gamma(),
            max_steps: self.max_steps(),
        }
    }

    /// Reset and return the first observation.
    fn reset_observe(
        &self,
        level: ObservabilityLevel,
        rng: &mut RngStream,
    ) -> Result<(Self::State, Vec<f32>)> {
        self.check_level(level)?;
        let s = self.reset(rng);
        let obs = self.observe(&s, level)?;
        Ok((s, obs))
    }

    /// `step` followed by `observe` and `action_mask`.
    fn step_observe(
        &self,
        state: &mut Self::State,
        action: usize,
        level: ObservabilityLevel,
        rng: &mut RngStream,
    ) -> Result<StepResult> {
        self.check_level(level)?;
        let t = self.step(state, action, rng)?;
        Ok(StepResult {
            obs: self.observe(state, level)?,
            reward: t.reward,
            terminated: t.terminated,
            truncated: t.truncated,
            mask: self.action_mask(state),
        })
    }
}

/// Shared episode-end bookkeeping: terminated wins over truncated.
pub(crate) fn finish(reward: f64, terminated: bool, steps: usize, max_steps: usize) -> Transition {
    Transition {
        reward,
        terminated,
        truncated: !terminated && steps >= max_steps,
    }
}
