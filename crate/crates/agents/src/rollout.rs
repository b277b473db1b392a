//! Fixed-length rollout storage, laid out environment-major so each
//! environment's segment is a contiguous sequence for backprop through time.

#[derive(Debug, Clone)]
pub struct Rollout {
    pub num_envs: usize,
    pub num_steps: usize,
    pub input_dim: usize,
    pub num_actions: usize,
    pub state_size: usize,
    pub gamma: f64,
    /// `[env][t][input_dim]`
    pub inputs: Vec<f64>,
    /// Input at `[env][t]` is the first of an episode.
    pub starts: Vec<bool>,
    /// Recurrent state before step 0, `[env][state_size]`.
    pub h0: Vec<f64>,
    pub actions: Vec<usize>,
    /// `[env][t][num_actions]`
    pub masks: Vec<bool>,
    /// Behaviour log-probability of the taken action.
    pub logp: Vec<f64>,
    /// `[critic][env][t]`
    pub values: Vec<Vec<f64>>,
    pub rewards: Vec<f64>,
    pub terminated: Vec<bool>,
    pub truncated: Vec<bool>,
    /// `[critic][env][t]`, meaningful where `truncated`.
    pub truncation_values: Vec<Vec<f64>>,
    /// `[critic][env]`
    pub bootstrap: Vec<Vec<f64>>,
}

impl Rollout {
    pub fn new(num_envs: usize, num_steps: usize, input_dim: usize, num_actions: usize, state_size: usize, n_critics: usize, gamma: f64) -> Self {
        let n = num_envs * num_steps;
        Self {
            num_envs,
            num_steps,
            input_dim,
            num_actions,
            state_size,
            gamma,
            inputs: vec![0.0; n * input_dim],
            starts: vec![false; n],
            h0: vec![0.0; num_envs * state_size],
            actions: vec![0; n],
            masks: vec![false; n * num_actions],
            logp: vec![0.0; n],
            values: vec![vec![0.0; n]; n_critics],
            rewards: vec![0.0; n],
            terminated: vec![false; n],
            truncated: vec![false; n],
            truncation_values: vec![vec![0.0; n]; n_critics],
            bootstrap: vec![vec![0.0; num_envs]; n_critics],
        }
    }

    pub fn n_critics(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn idx(&self, env: usize, t: usize) -> usize {
        env * self.num_steps + t
    }

    /// Index range of environment `env`'s segment in per-step arrays.
    pub fn seg(&self, env: usize) -> std::ops::Range<usize> {
        env * self.num_steps..(env + 1) * self.num_steps
    }
}
