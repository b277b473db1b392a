//! First-person grid mazes with a random start, facing and goal per episode.
//!
//! Layout files are rectangular ASCII grids of `#` (wall) and `.` (free).
//! Blank lines and lines starting with `;` are ignored.
//!
//! The partial observation is the 2-deep, 3-wide window in front of the
//! agent, expressed in the agent's frame (its own cell is not included):
//!
//! ```text
//!   depth 2:  [L2] [F2] [R2]
//!   depth 1:  [L1] [F1] [R1]
//!                  [^]          <- agent, facing up the page
//! ```
//!
//! Flattened as `(depth, lateral, channel)` with depth 1 first, lateral from
//! the agent's left to its right, channels `(wall, goal)`. Cells outside the
//! map read as walls.
//!
//! The full-state observation is the map shifted so the agent sits at the
//! centre of a `(2h-1) × (2w-1)` image with channels
//! `(wall, goal, facing N, facing E, facing S, facing W)`.

use std::collections::VecDeque;
use std::sync::Arc;

use crate::env::{finish, Environment, Transition};
use crate::error::{EnvError, Result};
use crate::rng::RngStream;
use crate::spaces::ObservabilityLevel;

pub const FORWARD: usize = 0;
pub const TURN_LEFT: usize = 1;
pub const TURN_RIGHT: usize = 2;

pub const GOAL_REWARD: f64 = 1.0;

pub const MAZE_01: &str = include_str!("../../mazes/maze_01.maze");
pub const MAZE_02: &str = include_str!("../../mazes/maze_02.maze");
pub const MAZE_03: &str = include_str!("../../mazes/maze_03.maze");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Facing {
    North,
    East,
    South,
    West,
}

impl Facing {
    pub const ALL: [Facing; 4] = [Facing::North, Facing::East, Facing::South, Facing::West];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn left(self) -> Facing {
        Facing::ALL[(self.index() + 3) % 4]
    }

    pub fn right(self) -> Facing {
        Facing::ALL[(self.index() + 1) % 4]
    }

    /// (d_row, d_col) of one step forward.
    pub fn delta(self) -> (isize, isize) {
        match self {
            Facing::North => (-1, 0),
            Facing::East => (0, 1),
            Facing::South => (1, 0),
            Facing::West => (0, -1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MazeLayout {
    pub id: String,
    pub height: usize,
    pub width: usize,
    walls: Vec<bool>,
    free: Vec<(usize, usize)>,
}

impl MazeLayout {
    /// Parse and validate an ASCII layout.
    pub fn parse(id: &str, text: &str) -> Result<Self> {
        let rows: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i, l.trim_end()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with(';'))
            .collect();
        if rows.is_empty() {
            return Err(EnvError::Layout { row: 0, col: 0, msg: "empty layout".into() });
        }
        let width = rows[0].1.chars().count();
        let height = rows.len();
        let mut walls = Vec::with_capacity(width * height);
        for (r, (line_no, line)) in rows.iter().enumerate() {
            let len = line.chars().count();
            if len != width {
                return Err(EnvError::Layout {
                    row: *line_no,
                    col: len.min(width),
                    msg: format!("ragged row: {len} cells, expected {width}"),
                });
            }
            for (c, ch) in line.chars().enumerate() {
                let wall = match ch {
                    '#' => true,
                    '.' => false,
                    other => {
                        return Err(EnvError::Layout {
                            row: *line_no,
                            col: c,
                            msg: format!("unexpected character '{other}'"),
                        })
                    }
                };
                let border = r == 0 || c == 0 || r + 1 == height || c + 1 == width;
                if border && !wall {
                    return Err(EnvError::Layout { row: *line_no, col: c, msg: "border must be walled".into() });
                }
                walls.push(wall);
            }
        }
        let free: Vec<(usize, usize)> = (0..height * width)
            .filter(|&i| !walls[i])
            .map(|i| (i / width, i % width))
            .collect();
        if free.len() < 2 {
            return Err(EnvError::Layout { row: 0, col: 0, msg: "need at least two free cells".into() });
        }
        let layout = Self { id: id.to_string(), height, width, walls, free };
        if let Some((r, c)) = layout.unreachable_cell() {
            return Err(EnvError::Layout { row: rows[r].0, col: c, msg: "free region is disconnected".into() });
        }
        Ok(layout)
    }

    fn unreachable_cell(&self) -> Option<(usize, usize)> {
        let mut seen = vec![false; self.walls.len()];
        let start = self.free[0];
        let mut queue = VecDeque::from([start]);
        seen[start.0 * self.width + start.1] = true;
        while let Some((r, c)) = queue.pop_front() {
            for f in Facing::ALL {
                let (dr, dc) = f.delta();
                let (nr, nc) = ((r as isize + dr) as usize, (c as isize + dc) as usize);
                let i = nr * self.width + nc;
                if !self.walls[i] && !seen[i] {
                    seen[i] = true;
                    queue.push_back((nr, nc));
                }
            }
        }
        self.free.iter().copied().find(|&(r, c)| !seen[r * self.width + c])
    }

    pub fn free_cells(&self) -> &[(usize, usize)] {
        &self.free
    }

    /// Wall lookup with everything off-map reading as wall.
    pub fn is_wall(&self, r: isize, c: isize) -> bool {
        if r < 0 || c < 0 || r >= self.height as isize || c >= self.width as isize {
            return true;
        }
        self.walls[r as usize * self.width + c as usize]
    }

    /// Built-in layouts `maze_01`, `maze_02`, `maze_03`.
    pub fn builtin(id: &str) -> Option<(MazeLayout, usize)> {
        let (text, max_steps) = match id {
            "01" => (MAZE_01, 2000),
            "02" => (MAZE_02, 4000),
            "03" => (MAZE_03, 6000),
            _ => return None,
        };
        Some((MazeLayout::parse(&format!("maze_{id}"), text).expect("built-in layout is valid"), max_steps))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MazeState {
    pub agent: (usize, usize),
    pub facing: Facing,
    pub goal: (usize, usize),
    pub steps: usize,
    pub done: bool,
}

#[derive(Debug, Clone)]
pub struct Maze {
    layout: Arc<MazeLayout>,
    max_steps: usize,
    gamma: f64,
}

const LEVELS: [ObservabilityLevel; 2] = [ObservabilityLevel::Partial, ObservabilityLevel::FullState];
pub const PARTIAL_DIM: usize = 2 * 3 * 2;
const FULL_CHANNELS: usize = 6;

impl Maze {
    pub fn new(layout: MazeLayout, max_steps: usize) -> Result<Self> {
        if max_steps == 0 {
            return Err(EnvError::Config("max_steps must be positive".into()));
        }
        Ok(Self { layout: Arc::new(layout), max_steps, gamma: 0.99 })
    }

    pub fn builtin(id: &str) -> Option<Self> {
        MazeLayout::builtin(id).map(|(l, m)| Self::new(l, m).expect("positive limit"))
    }

    pub fn layout(&self) -> &MazeLayout {
        &self.layout
    }

    pub fn state_at(&self, agent: (usize, usize), facing: Facing, goal: (usize, usize)) -> MazeState {
        MazeState { agent, facing, goal, steps: 0, done: false }
    }

    fn full_dims(&self) -> (usize, usize) {
        (2 * self.layout.height - 1, 2 * self.layout.width - 1)
    }

    /// Recover `(agent, facing, goal)` from a full-state observation.
    pub fn decode_full(&self, obs: &[f32]) -> Option<((usize, usize), Facing, (usize, usize))> {
        let (fh, fw) = self.full_dims();
        let (h, w) = (self.layout.height as isize, self.layout.width as isize);
        let at = |i: usize, j: usize, ch: usize| obs[(i * fw + j) * FULL_CHANNELS + ch] > 0.5;
        let facing = Facing::ALL.into_iter().find(|f| at(0, 0, 2 + f.index()))?;
        let mut goal_cell = None;
        for i in 0..fh {
            for j in 0..fw {
                if at(i, j, 1) {
                    goal_cell = Some((i, j));
                }
            }
        }
        let (gi, gj) = goal_cell?;
        for &(r, c) in self.layout.free_cells() {
            let matches = (0..fh).all(|i| {
                (0..fw).all(|j| {
                    let mr = r as isize + i as isize - (h - 1);
                    let mc = c as isize + j as isize - (w - 1);
                    at(i, j, 0) == self.layout.is_wall(mr, mc)
                })
            });
            if matches {
                let gr = r as isize + gi as isize - (h - 1);
                let gc = c as isize + gj as isize - (w - 1);
                return Some(((r, c), facing, (gr as usize, gc as usize)));
            }
        }
        None
    }
}

impl Environment for Maze {
    type State = MazeState;

    fn id(&self) -> String {
        self.layout.id.clone()
    }

    fn num_actions(&self) -> usize {
        3
    }

    fn levels(&self) -> &[ObservabilityLevel] {
        &LEVELS
    }

    fn raw_obs_dim(&self, level: ObservabilityLevel) -> usize {
        match level {
            ObservabilityLevel::FullState => {
                let (fh, fw) = self.full_dims();
                fh * fw * FULL_CHANNELS
            }
            _ => PARTIAL_DIM,
        }
    }

    fn gamma(&self) -> f64 {
        self.gamma
    }

    fn max_steps(&self) -> usize {
        self.max_steps
    }

    fn reward_range(&self) -> (f64, f64) {
        (0.0, GOAL_REWARD)
    }

    fn reset(&self, rng: &mut RngStream) -> MazeState {
        let free = self.layout.free_cells();
        let picks = rng.sample_distinct(free.len(), 2);
        let facing = Facing::ALL[rng.below(4)];
        self.state_at(free[picks[0]], facing, free[picks[1]])
    }

    fn step(&self, s: &mut MazeState, action: usize, _rng: &mut RngStream) -> Result<Transition> {
        if s.done {
            return Err(EnvError::Contract("step called on a finished maze episode".into()));
        }
        s.steps += 1;
        let mut reward = 0.0;
        let mut terminated = false;
        match action {
            FORWARD => {
                let (dr, dc) = s.facing.delta();
                let (nr, nc) = (s.agent.0 as isize + dr, s.agent.1 as isize + dc);
                if !self.layout.is_wall(nr, nc) {
                    s.agent = (nr as usize, nc as usize);
                    if s.agent == s.goal {
                        reward = GOAL_REWARD;
                        terminated = true;
                    }
                }
            }
            TURN_LEFT => s.facing = s.facing.left(),
            TURN_RIGHT => s.facing = s.facing.right(),
            other => return Err(EnvError::Contract(format!("maze action {other} out of range"))),
        }
        let t = finish(reward, terminated, s.steps, self.max_steps);
        s.done = t.done();
        Ok(t)
    }

    fn write_obs(&self, s: &MazeState, level: ObservabilityLevel, out: &mut [f32]) {
        out.fill(0.0);
        let (ar, ac) = (s.agent.0 as isize, s.agent.1 as isize);
        let (gr, gc) = (s.goal.0 as isize, s.goal.1 as isize);
        match level {
            ObservabilityLevel::FullState => {
                let (h, w) = (self.layout.height as isize, self.layout.width as isize);
                let (fh, fw) = self.full_dims();
                let f = 2 + s.facing.index();
                for i in 0..fh {
                    let mr = ar + i as isize - (h - 1);
                    for j in 0..fw {
                        let mc = ac + j as isize - (w - 1);
                        let base = (i * fw + j) * FULL_CHANNELS;
                        out[base] = self.layout.is_wall(mr, mc) as u8 as f32;
                        out[base + 1] = (mr == gr && mc == gc) as u8 as f32;
                        out[base + f] = 1.0;
                    }
                }
            }
            _ => {
                let (fr, fc) = s.facing.delta();
                let (rr, rc) = s.facing.right().delta();
                for depth in 1..=2isize {
                    for (li, lateral) in (-1..=1isize).enumerate() {
                        let r = ar + depth * fr + lateral * rr;
                        let c = ac + depth * fc + lateral * rc;
                        let base = (((depth - 1) as usize) * 3 + li) * 2;
                        out[base] = self.layout.is_wall(r, c) as u8 as f32;
                        out[base + 1] = (r == gr && c == gc) as u8 as f32;
                    }
                }
            }
        }
    }

    fn write_mask(&self, _s: &MazeState, out: &mut [bool]) {
        out.fill(true);
    }
}
