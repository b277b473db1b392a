//! T-Maze: a corridor whose first cell tells the agent which arm of the
//! terminal junction pays out.
//!
//! ```text
//!                      [up arm]
//!  x=0   1   2  ...  n  n+1
//!  [S] [ ] [ ] ... [ ] [J]
//!                      [down arm]
//! ```
//!
//! Partial observation `[up, down, corridor, junction]`: the hallway bits are
//! only shown at `x = 0`. The full-state variant keeps them set everywhere.

use crate::env::{finish, Environment, Transition};
use crate::error::{EnvError, Result};
use crate::rng::RngStream;
use crate::spaces::ObservabilityLevel;

pub const NORTH: usize = 0;
pub const SOUTH: usize = 1;
pub const EAST: usize = 2;
pub const WEST: usize = 3;

pub const GOAL_REWARD: f64 = 4.0;
pub const WRONG_REWARD: f64 = -0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hallway {
    RewardUp,
    RewardDown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    Up,
    Down,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TMazeState {
    pub hallway: Hallway,
    pub x: usize,
    pub at_junction_arm: Option<Arm>,
    pub steps: usize,
    pub done: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TMaze {
    length: usize,
    gamma: f64,
    max_steps: usize,
}

const LEVELS: [ObservabilityLevel; 2] = [ObservabilityLevel::Partial, ObservabilityLevel::FullState];

impl TMaze {
    pub fn new(length: usize, gamma: f64) -> Result<Self> {
        if length < 1 {
            return Err(EnvError::Config("tmaze corridor length must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(EnvError::Config(format!("gamma {gamma} outside [0, 1]")));
        }
        Ok(Self {
            length,
            gamma,
            max_steps: 10 * (length + 2),
        })
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn junction(&self) -> usize {
        self.length + 1
    }

    /// Return of the shortest successful episode, `4 * gamma^(n+1)`.
    pub fn optimal_return(&self) -> f64 {
        GOAL_REWARD * self.gamma.powi(self.length as i32 + 1)
    }

    /// State with a chosen hallway; used by tests and scripted rollouts.
    pub fn state_at(&self, hallway: Hallway, x: usize) -> TMazeState {
        TMazeState {
            hallway,
            x: x.min(self.junction()),
            at_junction_arm: None,
            steps: 0,
            done: false,
        }
    }
}

impl Environment for TMaze {
    type State = TMazeState;

    fn id(&self) -> String {
        format!("tmaze_{}", self.length)
    }

    fn num_actions(&self) -> usize {
        4
    }

    fn levels(&self) -> &[ObservabilityLevel] {
        &LEVELS
    }

    fn raw_obs_dim(&self, _level: ObservabilityLevel) -> usize {
        4
    }

    fn gamma(&self) -> f64 {
        self.gamma
    }

    fn max_steps(&self) -> usize {
        self.max_steps
    }

    fn reward_range(&self) -> (f64, f64) {
        (WRONG_REWARD, GOAL_REWARD)
    }

    fn reset(&self, rng: &mut RngStream) -> TMazeState {
        let hallway = if rng.below(2) == 0 {
            Hallway::RewardUp
        } else {
            Hallway::RewardDown
        };
        self.state_at(hallway, 0)
    }

    fn step(&self, s: &mut TMazeState, action: usize, _rng: &mut RngStream) -> Result<Transition> {
        if s.done {
            return Err(EnvError::Contract("step called on a finished tmaze episode".into()));
        }
        if action >= 4 {
            return Err(EnvError::Contract(format!("tmaze action {action} out of range")));
        }
        s.steps += 1;
        let junction = self.junction();
        let mut reward = 0.0;
        let mut terminated = false;
        match action {
            EAST if s.x < junction => s.x += 1,
            WEST if s.x > 0 => s.x -= 1,
            NORTH | SOUTH if s.x == junction => {
                let arm = if action == NORTH { Arm::Up } else { Arm::Down };
                let correct = matches!(
                    (arm, s.hallway),
                    (Arm::Up, Hallway::RewardUp) | (Arm::Down, Hallway::RewardDown)
                );
                reward = if correct { GOAL_REWARD } else { WRONG_REWARD };
                s.at_junction_arm = Some(arm);
                terminated = true;
            }
            // Walls.
            _ => {}
        }
        let t = finish(reward, terminated, s.steps, self.max_steps);
        s.done = t.done();
        Ok(t)
    }

    fn write_obs(&self, s: &TMazeState, level: ObservabilityLevel, out: &mut [f32]) {
        out.fill(0.0);
        let show_hallway = s.x == 0 || level == ObservabilityLevel::FullState;
        if show_hallway {
            match s.hallway {
                Hallway::RewardUp => out[0] = 1.0,
                Hallway::RewardDown => out[1] = 1.0,
            }
        }
        if s.x == self.junction() {
            out[3] = 1.0;
        } else if s.x > 0 {
            out[2] = 1.0;
        }
    }

    fn write_mask(&self, _s: &TMazeState, out: &mut [bool]) {
        out.fill(true);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::discounted_return;

    fn env() -> TMaze {
        TMaze::new(10, 0.99).unwrap()
    }

    #[test]
    fn rejects_zero_length() {
        assert!(matches!(TMaze::new(0, 0.99), Err(EnvError::Config(_))));
    }

    #[test]
    fn reset_obs_shows_hallway() {
        let e = env();
        let up = e.state_at(Hallway::RewardUp, 0);
        let down = e.state_at(Hallway::RewardDown, 0);
        assert_eq!(e.observe(&up, ObservabilityLevel::Partial).unwrap(), vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(e.observe(&down, ObservabilityLevel::Partial).unwrap(), vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn observe_levels() {
        let e = env();
        let s = e.state_at(Hallway::RewardUp, 3);
        assert_eq!(e.observe(&s, ObservabilityLevel::FullState).unwrap(), vec![1.0, 0.0, 1.0, 0.0]);
        assert_eq!(e.observe(&s, ObservabilityLevel::Partial).unwrap(), vec![0.0, 0.0, 1.0, 0.0]);
        let start = e.state_at(Hallway::RewardDown, 0);
        assert_eq!(e.observe(&start, ObservabilityLevel::FullState).unwrap(), vec![0.0, 1.0, 0.0, 0.0]);
        let j = e.state_at(Hallway::RewardUp, 11);
        assert_eq!(e.observe(&j, ObservabilityLevel::Partial).unwrap(), vec![0.0, 0.0, 0.0, 1.0]);
        assert!(matches!(
            e.observe(&s, ObservabilityLevel::PerfectMemory),
            Err(EnvError::Capability { .. })
        ));
    }

    #[test]
    fn junction_rewards() {
        let e = env();
        let mut rng = RngStream::new(0, 0);
        let mut s = e.state_at(Hallway::RewardUp, 11);
        let t = e.step(&mut s, NORTH, &mut rng).unwrap();
        assert_eq!(t.reward, 4.0);
        assert!(t.terminated && !t.truncated);
        assert!(matches!(e.step(&mut s, NORTH, &mut rng), Err(EnvError::Contract(_))));

        let mut s = e.state_at(Hallway::RewardUp, 11);
        let t = e.step(&mut s, SOUTH, &mut rng).unwrap();
        assert_eq!(t.reward, -0.1);
        assert!(t.terminated);
    }

    #[test]
    fn corridor_walls_are_noops() {
        let e = env();
        let mut rng = RngStream::new(0, 0);
        let mut s = e.state_at(Hallway::RewardDown, 4);
        for a in [NORTH, SOUTH] {
            let t = e.step(&mut s, a, &mut rng).unwrap();
            assert_eq!((t.reward, t.terminated, s.x), (0.0, false, 4));
        }
        let mut s = e.state_at(Hallway::RewardDown, 0);
        e.step(&mut s, WEST, &mut rng).unwrap();
        assert_eq!(s.x, 0);
        let mut s = e.state_at(Hallway::RewardDown, 11);
        e.step(&mut s, EAST, &mut rng).unwrap();
        assert_eq!(s.x, 11);
    }

    #[test]
    fn optimal_policy_return() {
        let e = env();
        let mut rng = RngStream::new(1, 0);
        for seed in 0..20u64 {
            let mut rng_reset = RngStream::new(seed, 0);
            let mut s = e.reset(&mut rng_reset);
            let hallway = s.hallway;
            let mut rewards = vec![];
            for _ in 0..=e.length() {
                let t = e.step(&mut s, EAST, &mut rng).unwrap();
                rewards.push(t.reward);
                assert!(!t.done());
            }
            let turn = if hallway == Hallway::RewardUp { NORTH } else { SOUTH };
            let t = e.step(&mut s, turn, &mut rng).unwrap();
            rewards.push(t.reward);
            assert!(t.terminated);
            assert_eq!(rewards.len(), 12);
            let ret = discounted_return(&rewards, 0.99);
            assert!((ret - 4.0 * 0.99f64.powi(11)).abs() < 1e-12);
            assert!((ret - e.optimal_return()).abs() < 1e-12);
        }
    }

    #[test]
    fn corridor_cells_alias_under_partial() {
        let e = env();
        for x in 1..=e.length() {
            let up = e.observe(&e.state_at(Hallway::RewardUp, x), ObservabilityLevel::Partial).unwrap();
            let down = e.observe(&e.state_at(Hallway::RewardDown, x), ObservabilityLevel::Partial).unwrap();
            assert_eq!(up, down, "x = {x}");
        }
    }

    #[test]
    fn truncates_after_limit() {
        let e = TMaze::new(2, 0.99).unwrap();
        let mut rng = RngStream::new(0, 0);
        let mut s = e.reset(&mut rng);
        let mut last = None;
        for _ in 0..e.max_steps() {
            last = Some(e.step(&mut s, NORTH, &mut rng).unwrap());
        }
        let t = last.unwrap();
        assert!(t.truncated && !t.terminated);
        assert_eq!(e.max_steps(), 40);
    }

    #[test]
    fn hallway_is_fair_coin() {
        let e = env();
        let mut rng = RngStream::new(11, 3);
        let n = 100_000;
        let ups = (0..n)
            .filter(|_| e.reset(&mut rng).hallway == Hallway::RewardUp)
            .count();
        let frac = ups as f64 / n as f64;
        assert!((frac - 0.5).abs() < 0.01, "frac = {frac}");
    }
}
