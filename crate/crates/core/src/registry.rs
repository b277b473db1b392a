//! String ids to environment instances.
//!
//! Recognised ids: `tmaze_{n}`, `rocksample_{n}_{k}`, `battleship_{n}`,
//! `maze_01` / `maze_02` / `maze_03`, and any path ending in `.maze`.

use std::path::Path;

use crate::env::{Environment, Transition};
use crate::envs::battleship::{Battleship, BattleshipState};
use crate::envs::maze::{Maze, MazeLayout, MazeState};
use crate::envs::rocksample::{RockSample, RockSampleState};
use crate::envs::tmaze::{TMaze, TMazeState};
use crate::error::{EnvError, Result};
use crate::rng::RngStream;
use crate::spaces::ObservabilityLevel;

/// Maze episode limit for layouts loaded from files.
pub const DEFAULT_FILE_MAZE_STEPS: usize = 1000;

/// Ids shown in error messages and `env-info` listings.
pub const KNOWN_IDS: &[&str] = &[
    "tmaze_{n}",
    "tmaze_10",
    "rocksample_{n}_{k}",
    "rocksample_11_11",
    "rocksample_15_15",
    "battleship_{n}",
    "battleship_10",
    "maze_01",
    "maze_02",
    "maze_03",
    "<path>.maze",
];

#[derive(Debug, Clone)]
pub enum AnyEnv {
    TMaze(TMaze),
    RockSample(RockSample),
    Battleship(Battleship),
    Maze(Maze),
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnyState {
    TMaze(TMazeState),
    RockSample(RockSampleState),
    Battleship(BattleshipState),
    Maze(MazeState),
}

fn unknown(id: &str) -> EnvError {
    EnvError::UnknownId {
        id: id.to_string(),
        valid: KNOWN_IDS.join(", "),
    }
}

fn parse_num(id: &str, s: &str) -> Result<usize> {
    s.parse::<usize>().map_err(|_| unknown(id))
}

/// Build an environment from its id string.
pub fn make(id: &str) -> Result<AnyEnv> {
    if id.ends_with(".maze") {
        let text = std::fs::read_to_string(id)
            .map_err(|e| EnvError::Config(format!("cannot read layout {id}: {e}")))?;
        let name = Path::new(id)
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or(id);
        let layout = MazeLayout::parse(name, &text)?;
        return Ok(AnyEnv::Maze(Maze::new(layout, DEFAULT_FILE_MAZE_STEPS)?));
    }
    let parts: Vec<&str> = id.split('_').collect();
    match parts.as_slice() {
        ["tmaze", n] => Ok(AnyEnv::TMaze(TMaze::new(parse_num(id, n)?, 0.99)?)),
        ["rocksample", n, k] => Ok(AnyEnv::RockSample(RockSample::new(
            parse_num(id, n)?,
            parse_num(id, k)?,
        )?)),
        ["battleship", n] => Ok(AnyEnv::Battleship(Battleship::standard(parse_num(id, n)?)?)),
        ["maze", m] => Maze::builtin(m).map(AnyEnv::Maze).ok_or_else(|| unknown(id)),
        _ => Err(unknown(id)),
    }
}

macro_rules! dispatch {
    ($self:expr, $e:ident => $body:expr) => {
        match $self {
            AnyEnv::TMaze($e) => $body,
            AnyEnv::RockSample($e) => $body,
            AnyEnv::Battleship($e) => $body,
            AnyEnv::Maze($e) => $body,
        }
    };
}

macro_rules! dispatch_state {
    ($self:expr, $state:expr, $e:ident, $s:ident => $body:expr) => {
        match ($self, $state) {
            (AnyEnv::TMaze($e), AnyState::TMaze($s)) => $body,
            (AnyEnv::RockSample($e), AnyState::RockSample($s)) => $body,
            (AnyEnv::Battleship($e), AnyState::Battleship($s)) => $body,
            (AnyEnv::Maze($e), AnyState::Maze($s)) => $body,
            _ => panic!("environment/state family mismatch"),
        }
    };
}

impl Environment for AnyEnv {
    type State = AnyState;

    fn id(&self) -> String {
        dispatch!(self, e => e.id())
    }

    fn num_actions(&self) -> usize {
        dispatch!(self, e => e.num_actions())
    }

    fn levels(&self) -> &[ObservabilityLevel] {
        dispatch!(self, e => e.levels())
    }

    fn raw_obs_dim(&self, level: ObservabilityLevel) -> usize {
        dispatch!(self, e => e.raw_obs_dim(level))
    }

    fn gamma(&self) -> f64 {
        dispatch!(self, e => e.gamma())
    }

    fn max_steps(&self) -> usize {
        dispatch!(self, e => e.max_steps())
    }

    fn reward_range(&self) -> (f64, f64) {
        dispatch!(self, e => e.reward_range())
    }

    fn reset(&self, rng: &mut RngStream) -> AnyState {
        match self {
            AnyEnv::TMaze(e) => AnyState::TMaze(e.reset(rng)),
            AnyEnv::RockSample(e) => AnyState::RockSample(e.reset(rng)),
            AnyEnv::Battleship(e) => AnyState::Battleship(e.reset(rng)),
            AnyEnv::Maze(e) => AnyState::Maze(e.reset(rng)),
        }
    }

    fn step(&self, state: &mut AnyState, action: usize, rng: &mut RngStream) -> Result<Transition> {
        dispatch_state!(self, state, e, s => e.step(s, action, rng))
    }

    fn write_obs(&self, state: &AnyState, level: ObservabilityLevel, out: &mut [f32]) {
        dispatch_state!(self, state, e, s => e.write_obs(s, level, out))
    }

    fn write_mask(&self, state: &AnyState, out: &mut [bool]) {
        dispatch_state!(self, state, e, s => e.write_mask(s, out))
    }
}
