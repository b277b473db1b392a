//! RockSample(n, k): an n×n rover grid with k rocks of unknown quality and a
//! noisy, distance-dependent rock sensor.
//!
//! Actions: `0..4` move N/S/E/W, `4` samples the current cell, `5 + i` checks
//! rock `i`. Observation: two-hot position (row one-hot ++ col one-hot) followed
//! by one sensor bit per rock.

use crate::env::{finish, Environment, Transition};
use crate::error::{EnvError, Result};
use crate::rng::RngStream;
use crate::spaces::ObservabilityLevel;

pub const NORTH: usize = 0;
pub const SOUTH: usize = 1;
pub const EAST: usize = 2;
pub const WEST: usize = 3;
pub const SAMPLE: usize = 4;
pub const FIRST_CHECK: usize = 5;

pub const EXIT_REWARD: f64 = 10.0;
pub const GOOD_REWARD: f64 = 10.0;
pub const BAD_REWARD: f64 = -10.0;

pub const DEFAULT_MAX_STEPS: usize = 1000;

/// Probability that a check reports the true rock quality at distance `d`.
pub fn sensor_accuracy(d: f64, max_d: f64) -> f64 {
    debug_assert!(d >= 0.0 && max_d > 0.0);
    0.5 * (1.0 + (-d / max_d).exp2())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RockSampleState {
    pub agent: (usize, usize),
    pub rock_pos: Vec<(usize, usize)>,
    pub rock_good: Vec<bool>,
    pub rock_collected: Vec<bool>,
    /// Sensor bits produced by the immediately preceding action only.
    pub last_sensor: Vec<bool>,
    /// Most recent sensor bit ever seen per rock.
    pub memory_sensor: Vec<bool>,
    pub steps: usize,
    pub done: bool,
}

impl RockSampleState {
    fn rock_at(&self, cell: (usize, usize)) -> Option<usize> {
        self.rock_pos.iter().position(|&p| p == cell)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RockSample {
    n: usize,
    k: usize,
    gamma: f64,
    max_steps: usize,
    max_d: f64,
}

const LEVELS: [ObservabilityLevel; 2] = [ObservabilityLevel::Partial, ObservabilityLevel::PerfectMemory];

impl RockSample {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        Self::with_params(n, k, 0.99, DEFAULT_MAX_STEPS)
    }

    pub fn with_params(n: usize, k: usize, gamma: f64, max_steps: usize) -> Result<Self> {
        if n < 2 {
            return Err(EnvError::Config("rocksample grid must be at least 2x2".into()));
        }
        if k > n * n {
            return Err(EnvError::Config(format!("{k} rocks do not fit on a {n}x{n} grid")));
        }
        if max_steps == 0 {
            return Err(EnvError::Config("max_steps must be positive".into()));
        }
        Ok(Self {
            n,
            k,
            gamma,
            max_steps,
            max_d: std::f64::consts::SQRT_2 * (n - 1) as f64,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Largest Euclidean distance between two cells of the grid.
    pub fn max_distance(&self) -> f64 {
        self.max_d
    }

    pub fn start_cell(&self) -> (usize, usize) {
        (self.n.div_ceil(2) - 1, 0)
    }

    /// State with rocks placed by hand, agent at the start cell.
    pub fn state_with_rocks(&self, rock_pos: Vec<(usize, usize)>, rock_good: Vec<bool>) -> Result<RockSampleState> {
        if rock_pos.len() != self.k || rock_good.len() != self.k {
            return Err(EnvError::Config(format!("expected {} rocks", self.k)));
        }
        for (i, p) in rock_pos.iter().enumerate() {
            if p.0 >= self.n || p.1 >= self.n || rock_pos[..i].contains(p) {
                return Err(EnvError::Config(format!("bad rock position {p:?}")));
            }
        }
        Ok(RockSampleState {
            agent: self.start_cell(),
            rock_pos,
            rock_good,
            rock_collected: vec![false; self.k],
            last_sensor: vec![false; self.k],
            memory_sensor: vec![false; self.k],
            steps: 0,
            done: false,
        })
    }

    fn distance(a: (usize, usize), b: (usize, usize)) -> f64 {
        let dr = a.0 as f64 - b.0 as f64;
        let dc = a.1 as f64 - b.1 as f64;
        (dr * dr + dc * dc).sqrt()
    }
}

impl Environment for RockSample {
    type State = RockSampleState;

    fn id(&self) -> String {
        format!("rocksample_{}_{}", self.n, self.k)
    }

    fn num_actions(&self) -> usize {
        FIRST_CHECK + self.k
    }

    fn levels(&self) -> &[ObservabilityLevel] {
        &LEVELS
    }

    fn raw_obs_dim(&self, _level: ObservabilityLevel) -> usize {
        2 * self.n + self.k
    }

    fn gamma(&self) -> f64 {
        self.gamma
    }

    fn max_steps(&self) -> usize {
        self.max_steps
    }

    fn reward_range(&self) -> (f64, f64) {
        (BAD_REWARD, GOOD_REWARD.max(EXIT_REWARD))
    }

    fn reset(&self, rng: &mut RngStream) -> RockSampleState {
        let cells = rng.sample_distinct(self.n * self.n, self.k);
        let rock_pos = cells.into_iter().map(|c| (c / self.n, c % self.n)).collect();
        let rock_good = (0..self.k).map(|_| rng.below(2) == 1).collect();
        self.state_with_rocks(rock_pos, rock_good)
            .expect("sampled rocks are valid")
    }

    fn step(&self, s: &mut RockSampleState, action: usize, rng: &mut RngStream) -> Result<Transition> {
        if s.done {
            return Err(EnvError::Contract("step called on a finished rocksample episode".into()));
        }
        if action >= self.num_actions() {
            return Err(EnvError::Contract(format!("rocksample action {action} out of range")));
        }
        s.steps += 1;
        s.last_sensor.fill(false);
        let (r, c) = s.agent;
        let mut reward = 0.0;
        let mut terminated = false;
        match action {
            NORTH => s.agent.0 = r.saturating_sub(1),
            SOUTH => s.agent.0 = (r + 1).min(self.n - 1),
            WEST => s.agent.1 = c.saturating_sub(1),
            EAST => {
                if c + 1 == self.n {
                    reward = EXIT_REWARD;
                    terminated = true;
                } else {
                    s.agent.1 = c + 1;
                }
            }
            SAMPLE => match s.rock_at(s.agent) {
                Some(i) => {
                    let good = s.rock_good[i] && !s.rock_collected[i];
                    reward = if good { GOOD_REWARD } else { BAD_REWARD };
                    if good {
                        s.rock_collected[i] = true;
                        s.rock_good[i] = false;
                    }
                    // Post-sample quality is always bad.
                    s.last_sensor[i] = false;
                    s.memory_sensor[i] = false;
                }
                None => reward = BAD_REWARD,
            },
            _ => {
                let i = action - FIRST_CHECK;
                let acc = sensor_accuracy(Self::distance(s.agent, s.rock_pos[i]), self.max_d);
                let truth = s.rock_good[i];
                let reading = if rng.uniform() < acc { truth } else { !truth };
                s.last_sensor[i] = reading;
                s.memory_sensor[i] = reading;
            }
        }
        let t = finish(reward, terminated, s.steps, self.max_steps);
        s.done = t.done();
        Ok(t)
    }

    fn write_obs(&self, s: &RockSampleState, level: ObservabilityLevel, out: &mut [f32]) {
        out.fill(0.0);
        out[s.agent.0] = 1.0;
        out[self.n + s.agent.1] = 1.0;
        let bits = match level {
            ObservabilityLevel::PerfectMemory => &s.memory_sensor,
            _ => &s.last_sensor,
        };
        for (o, &b) in out[2 * self.n..].iter_mut().zip(bits) {
            *o = b as u8 as f32;
        }
    }

    fn write_mask(&self, _s: &RockSampleState, out: &mut [bool]) {
        out.fill(true);
    }
}
