//! Batched stepping of N instances of one environment with auto-reset.
//!
//! Instance `i` owns the random stream `(seed, i)`. Each instance only ever
//! touches its own state, stream and buffer rows, so results are identical for
//! any worker count.

use std::sync::Arc;

use rayon::prelude::*;

use crate::env::Environment;
use crate::error::{EnvError, Result};
use crate::rng::RngStream;
use crate::spaces::ObservabilityLevel;

/// Instances per rayon task; keeps scheduling overhead low for cheap envs.
const MIN_SHARD: usize = 32;

pub struct BatchEnv<E: Environment> {
    env: Arc<E>,
    level: ObservabilityLevel,
    seed: u64,
    obs_dim: usize,
    num_actions: usize,
    states: Vec<E::State>,
    rngs: Vec<RngStream>,
    obs: Vec<f32>,
    final_obs: Vec<f32>,
    masks: Vec<bool>,
    rewards: Vec<f64>,
    terminated: Vec<bool>,
    truncated: Vec<bool>,
    pool: Option<Arc<rayon::ThreadPool>>,
}

/// Borrowed view of the buffers after a batch step.
#[derive(Debug)]
pub struct BatchStep<'a> {
    pub obs: &'a [f32],
    pub rewards: &'a [f64],
    pub terminated: &'a [bool],
    pub truncated: &'a [bool],
    pub masks: &'a [bool],
}

/// Build a worker pool, or `None` for in-thread stepping when `workers <= 1`.
pub fn worker_pool(workers: usize) -> Result<Option<Arc<rayon::ThreadPool>>> {
    if workers <= 1 {
        return Ok(None);
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map(|p| Some(Arc::new(p)))
        .map_err(|e| EnvError::Config(format!("cannot build worker pool: {e}")))
}

impl<E: Environment> BatchEnv<E> {
    /// Create and reset `num_envs` instances.
    pub fn new(env: E, level: ObservabilityLevel, num_envs: usize, seed: u64) -> Result<Self> {
        Self::with_pool(Arc::new(env), level, num_envs, seed, None)
    }

    pub fn with_workers(env: E, level: ObservabilityLevel, num_envs: usize, seed: u64, workers: usize) -> Result<Self> {
        Self::with_pool(Arc::new(env), level, num_envs, seed, worker_pool(workers)?)
    }

    pub fn with_pool(
        env: Arc<E>,
        level: ObservabilityLevel,
        num_envs: usize,
        seed: u64,
        pool: Option<Arc<rayon::ThreadPool>>,
    ) -> Result<Self> {
        if num_envs == 0 {
            return Err(EnvError::Config("num_envs must be at least 1".into()));
        }
        let obs_dim = env.obs_dim(level)?;
        let num_actions = env.num_actions();
        let rngs: Vec<RngStream> = (0..num_envs as u64).map(|i| RngStream::new(seed, i)).collect();
        let mut batch = Self {
            states: Vec::with_capacity(num_envs),
            rngs,
            obs: vec![0.0; num_envs * obs_dim],
            final_obs: vec![0.0; num_envs * obs_dim],
            masks: vec![false; num_envs * num_actions],
            rewards: vec![0.0; num_envs],
            terminated: vec![false; num_envs],
            truncated: vec![false; num_envs],
            env,
            level,
            seed,
            obs_dim,
            num_actions,
            pool,
        };
        batch.reset_all();
        Ok(batch)
    }

    fn reset_all(&mut self) {
        self.states.clear();
        for (i, rng) in self.rngs.iter_mut().enumerate() {
            let s = self.env.reset(rng);
            self.env
                .write_obs(&s, self.level, &mut self.obs[i * self.obs_dim..(i + 1) * self.obs_dim]);
            self.env
                .write_mask(&s, &mut self.masks[i * self.num_actions..(i + 1) * self.num_actions]);
            self.states.push(s);
        }
        self.rewards.fill(0.0);
        self.terminated.fill(false);
        self.truncated.fill(false);
    }

    /// Re-seed every stream and reset every instance.
    pub fn reset(&mut self, seed: u64) {
        self.seed = seed;
        self.rngs = (0..self.num_envs() as u64).map(|i| RngStream::new(seed, i)).collect();
        self.reset_all();
    }

    /// Step every instance. Finished episodes are reset in place: the returned
    /// observation row is the new episode's first observation while the flags
    /// and reward describe the transition that ended the old one. The old
    /// episode's last observation is kept in [`BatchEnv::final_obs_row`].
    pub fn step(&mut self, actions: &[usize]) -> Result<BatchStep<'_>> {
        let n = self.num_envs();
        if actions.len() != n {
            return Err(EnvError::Contract(format!("expected {n} actions, got {}", actions.len())));
        }
        let a_dim = self.num_actions;
        for (i, &a) in actions.iter().enumerate() {
            if a >= a_dim || !self.masks[i * a_dim + a] {
                return Err(EnvError::IllegalAction { instance: i, action: a });
            }
        }

        let env = &*self.env;
        let level = self.level;
        let obs_dim = self.obs_dim;
        type Row<'r, S> = (
            (((((((&'r mut S, &'r mut RngStream), &'r mut [f32]), &'r mut [f32]), &'r mut [bool]), &'r mut f64), &'r mut bool), &'r mut bool),
            &'r usize,
        );
        let work = |((((((((s, rng), obs), fin), mask), r), term), trunc), &a): Row<'_, E::State>| -> Result<()> {
            let t = env.step(s, a, rng)?;
            *r = t.reward;
            *term = t.terminated;
            *trunc = t.truncated;
            if t.done() {
                env.write_obs(s, level, fin);
                *s = env.reset(rng);
            }
            env.write_obs(s, level, obs);
            env.write_mask(s, mask);
            Ok(())
        };

        match &self.pool {
            None => self
                .states
                .iter_mut()
                .zip(self.rngs.iter_mut())
                .zip(self.obs.chunks_mut(obs_dim))
                .zip(self.final_obs.chunks_mut(obs_dim))
                .zip(self.masks.chunks_mut(a_dim))
                .zip(self.rewards.iter_mut())
                .zip(self.terminated.iter_mut())
                .zip(self.truncated.iter_mut())
                .zip(actions.iter())
                .try_for_each(work)?,
            Some(pool) => pool.install(|| {
                self.states
                    .par_iter_mut()
                    .zip(self.rngs.par_iter_mut())
                    .zip(self.obs.par_chunks_mut(obs_dim))
                    .zip(self.final_obs.par_chunks_mut(obs_dim))
                    .zip(self.masks.par_chunks_mut(a_dim))
                    .zip(self.rewards.par_iter_mut())
                    .zip(self.terminated.par_iter_mut())
                    .zip(self.truncated.par_iter_mut())
                    .zip(actions.par_iter())
                    .with_min_len(MIN_SHARD)
                    .try_for_each(work)
            })?,
        }

        Ok(self.view())
    }

    pub fn view(&self) -> BatchStep<'_> {
        BatchStep {
            obs: &self.obs,
            rewards: &self.rewards,
            terminated: &self.terminated,
            truncated: &self.truncated,
            masks: &self.masks,
        }
    }

    pub fn env(&self) -> &E {
        &self.env
    }

    pub fn level(&self) -> ObservabilityLevel {
        self.level
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn num_envs(&self) -> usize {
        self.rngs.len()
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn obs(&self) -> &[f32] {
        &self.obs
    }

    pub fn obs_row(&self, i: usize) -> &[f32] {
        &self.obs[i * self.obs_dim..(i + 1) * self.obs_dim]
    }

    /// Last observation of the episode instance `i` finished on the most
    /// recent step. Stale unless that step reported done for `i`.
    pub fn final_obs_row(&self, i: usize) -> &[f32] {
        &self.final_obs[i * self.obs_dim..(i + 1) * self.obs_dim]
    }

    pub fn masks(&self) -> &[bool] {
        &self.masks
    }

    pub fn mask_row(&self, i: usize) -> &[bool] {
        &self.masks[i * self.num_actions..(i + 1) * self.num_actions]
    }

    pub fn states(&self) -> &[E::State] {
        &self.states
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::tmaze::{TMaze, EAST, NORTH, WEST};

    #[test]
    fn shapes_and_determinism() {
        let b = BatchEnv::new(TMaze::new(10, 0.99).unwrap(), ObservabilityLevel::Partial, 4, 3).unwrap();
        assert_eq!(b.obs().len(), 4 * 4);
        let c = BatchEnv::new(TMaze::new(10, 0.99).unwrap(), ObservabilityLevel::Partial, 4, 3).unwrap();
        assert_eq!(b.obs(), c.obs());
    }

    #[test]
    fn single_instance_matches_standalone_reset() {
        let env = TMaze::new(10, 0.99).unwrap();
        let b = BatchEnv::new(env.clone(), ObservabilityLevel::Partial, 1, 9).unwrap();
        let mut rng = RngStream::new(9, 0);
        let (_, obs) = env.reset_observe(ObservabilityLevel::Partial, &mut rng).unwrap();
        assert_eq!(b.obs_row(0), &obs[..]);
    }

    #[test]
    fn rejects_zero_envs_and_bad_level() {
        let env = TMaze::new(3, 0.99).unwrap();
        assert!(BatchEnv::new(env.clone(), ObservabilityLevel::Partial, 0, 0).is_err());
        assert!(matches!(
            BatchEnv::new(env, ObservabilityLevel::PerfectMemory, 2, 0),
            Err(EnvError::Capability { .. })
        ));
    }

    #[test]
    fn auto_reset_on_termination() {
        let env = TMaze::new(1, 0.99).unwrap();
        let mut b = BatchEnv::new(env, ObservabilityLevel::Partial, 2, 0).unwrap();
        b.step(&[EAST, EAST]).unwrap();
        b.step(&[EAST, NORTH]).unwrap();
        let out = b.step(&[NORTH, NORTH]).unwrap();
        assert!(out.terminated[0]);
        assert!(!out.terminated[1] && !out.truncated[1]);
        assert_eq!(&out.obs[4..8], &[0.0, 0.0, 1.0, 0.0]);
        // Fresh episode: hallway bits visible, no corridor/junction bits.
        let row = &out.obs[0..4];
        assert_eq!(row[0] + row[1], 1.0);
        assert_eq!(row[2] + row[3], 0.0);
        // Terminal row of the finished episode: at the junction.
        assert_eq!(&b.final_obs_row(0)[2..4], &[0.0, 1.0]);
        let out = b.step(&[EAST, WEST]).unwrap();
        assert!(out.terminated.iter().all(|&t| !t));
    }

    #[test]
    fn illegal_action_names_instance() {
        let env = TMaze::new(3, 0.99).unwrap();
        let mut b = BatchEnv::new(env, ObservabilityLevel::Partial, 3, 0).unwrap();
        let err = b.step(&[0, 9, 0]).unwrap_err();
        assert_eq!(err, EnvError::IllegalAction { instance: 1, action: 9 });
        assert!(b.step(&[0, 0]).is_err());
    }
}
