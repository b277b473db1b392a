//! Single-player Battleship on an n×n board.
//!
//! Each step fires at one cell (`row * n + col`); previously fired cells are
//! masked. Every shot costs 1 and sinking the last ship cell pays 100 and ends
//! the episode, so an episode of `T` shots returns `100 - T`.
//!
//! Observation layouts:
//! * partial: `[last_hit] ++ one_hot(last_action, n*n)`
//! * perfect memory: per cell `(hit, miss)` pairs, row-major, `2*n*n` entries
//! * full state: perfect memory followed by the `n*n` ship-cell indicator

use crate::env::{finish, Environment, Transition};
use crate::error::{EnvError, Result};
use crate::rng::RngStream;
use crate::spaces::ObservabilityLevel;

pub const STEP_REWARD: f64 = -1.0;
pub const WIN_REWARD: f64 = 100.0;
pub const STANDARD_SHIPS: [usize; 4] = [5, 4, 3, 2];

const LEVELS: [ObservabilityLevel; 3] = ObservabilityLevel::ALL;
const MAX_PLACEMENT_ATTEMPTS: usize = 1_000_000;

/// One axis-aligned ship position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Placement {
    pub len: usize,
    pub row: usize,
    pub col: usize,
    pub horizontal: bool,
}

impl Placement {
    pub fn cells(&self, n: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).map(move |i| {
            if self.horizontal {
                self.row * n + self.col + i
            } else {
                (self.row + i) * n + self.col
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BattleshipState {
    pub ship: Vec<bool>,
    pub fired: Vec<bool>,
    pub hits_remaining: usize,
    pub last_action: Option<usize>,
    pub last_hit: bool,
    pub steps: usize,
    pub done: bool,
}

impl BattleshipState {
    pub fn num_hits(&self) -> usize {
        self.fired.iter().zip(&self.ship).filter(|(&f, &s)| f && s).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Battleship {
    n: usize,
    ships: Vec<usize>,
    allow_touching: bool,
    total_ship_cells: usize,
}

impl Battleship {
    /// `battleship_n` with the standard fleet `{5, 4, 3, 2}`.
    pub fn standard(n: usize) -> Result<Self> {
        Self::new(n, STANDARD_SHIPS.to_vec(), true)
    }

    pub fn new(n: usize, ships: Vec<usize>, allow_touching: bool) -> Result<Self> {
        if n == 0 || ships.is_empty() {
            return Err(EnvError::Config("battleship needs a board and at least one ship".into()));
        }
        if let Some(&l) = ships.iter().find(|&&l| l == 0 || l > n) {
            return Err(EnvError::Config(format!("ship length {l} does not fit a {n}x{n} board")));
        }
        let total: usize = ships.iter().sum();
        if total > n * n {
            return Err(EnvError::Config("fleet larger than the board".into()));
        }
        let env = Self {
            n,
            ships,
            allow_touching,
            total_ship_cells: total,
        };
        // Make sure rejection sampling can succeed at all.
        let mut probe = RngStream::new(0, u64::MAX);
        if env.try_place(&mut probe, &[]).is_none() {
            return Err(EnvError::Config("no legal ship placement found".into()));
        }
        Ok(env)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ships(&self) -> &[usize] {
        &self.ships
    }

    pub fn total_ship_cells(&self) -> usize {
        self.total_ship_cells
    }

    /// All distinct on-board placements of a ship of length `len`.
    pub fn placements(&self, len: usize) -> Vec<Placement> {
        let n = self.n;
        let mut out = Vec::new();
        for row in 0..n {
            for col in 0..=(n - len) {
                out.push(Placement { len, row, col, horizontal: true });
            }
        }
        if len > 1 {
            for row in 0..=(n - len) {
                for col in 0..n {
                    out.push(Placement { len, row, col, horizontal: false });
                }
            }
        }
        out
    }

    fn random_placement(&self, len: usize, rng: &mut RngStream) -> Placement {
        let n = self.n;
        let horizontal = rng.below(2) == 0;
        if horizontal {
            Placement { len, row: rng.below(n), col: rng.below(n - len + 1), horizontal }
        } else {
            Placement { len, row: rng.below(n - len + 1), col: rng.below(n), horizontal }
        }
    }

    fn neighbours(&self, cell: usize) -> impl Iterator<Item = usize> + '_ {
        let n = self.n as isize;
        let (r, c) = ((cell / self.n) as isize, (cell % self.n) as isize);
        (-1..=1).flat_map(move |dr| (-1..=1).map(move |dc| (r + dr, c + dc)))
            .filter(move |&(rr, cc)| rr >= 0 && cc >= 0 && rr < n && cc < n)
            .map(move |(rr, cc)| (rr * n + cc) as usize)
    }

    /// One full rejection-sampling attempt. Placements covering a cell in
    /// `forbidden` are rejected.
    fn try_place_once(&self, rng: &mut RngStream, forbidden: &[bool]) -> Option<Vec<i32>> {
        // Cell -> ship index occupying it, or -1.
        let mut grid = vec![-1i32; self.n * self.n];
        for (si, &len) in self.ships.iter().enumerate() {
            let p = self.random_placement(len, rng);
            for cell in p.cells(self.n) {
                if grid[cell] >= 0 || forbidden.get(cell).copied().unwrap_or(false) {
                    return None;
                }
                if !self.allow_touching
                    && self.neighbours(cell).any(|nb| grid[nb] >= 0 && grid[nb] != si as i32)
                {
                    return None;
                }
                grid[cell] = si as i32;
            }
        }
        Some(grid)
    }

    fn try_place(&self, rng: &mut RngStream, forbidden: &[bool]) -> Option<Vec<bool>> {
        (0..MAX_PLACEMENT_ATTEMPTS)
            .find_map(|_| self.try_place_once(rng, forbidden))
            .map(|g| g.into_iter().map(|s| s >= 0).collect())
    }

    /// Uniform random fleet: each ship is drawn uniformly over its on-board
    /// placements and the whole fleet is redrawn on any overlap.
    pub fn place_ships(&self, rng: &mut RngStream) -> Vec<bool> {
        loop {
            if let Some(g) = self.try_place_once(rng, &[]) {
                return g.into_iter().map(|s| s >= 0).collect();
            }
        }
    }

    /// Fresh state with a given ship grid.
    pub fn state_with_ships(&self, ship: Vec<bool>) -> Result<BattleshipState> {
        if ship.len() != self.n * self.n {
            return Err(EnvError::Config("ship grid has the wrong size".into()));
        }
        let hits_remaining = ship.iter().filter(|&&s| s).count();
        if hits_remaining == 0 {
            return Err(EnvError::Config("ship grid is empty".into()));
        }
        Ok(BattleshipState {
            ship,
            fired: vec![false; self.n * self.n],
            hits_remaining,
            last_action: None,
            last_hit: false,
            steps: 0,
            done: false,
        })
    }
}

impl Environment for Battleship {
    type State = BattleshipState;

    fn id(&self) -> String {
        format!("battleship_{}", self.n)
    }

    fn num_actions(&self) -> usize {
        self.n * self.n
    }

    fn levels(&self) -> &[ObservabilityLevel] {
        &LEVELS
    }

    fn raw_obs_dim(&self, level: ObservabilityLevel) -> usize {
        let cells = self.n * self.n;
        match level {
            ObservabilityLevel::Partial => 1 + cells,
            ObservabilityLevel::PerfectMemory => 2 * cells,
            ObservabilityLevel::FullState => 3 * cells,
        }
    }

    fn gamma(&self) -> f64 {
        1.0
    }

    fn max_steps(&self) -> usize {
        self.n * self.n
    }

    fn reward_range(&self) -> (f64, f64) {
        (STEP_REWARD, STEP_REWARD + WIN_REWARD)
    }

    fn reset(&self, rng: &mut RngStream) -> BattleshipState {
        self.state_with_ships(self.place_ships(rng))
            .expect("placed fleet is non-empty")
    }

    fn step(&self, s: &mut BattleshipState, action: usize, _rng: &mut RngStream) -> Result<Transition> {
        if s.done {
            return Err(EnvError::Contract("step called on a finished battleship episode".into()));
        }
        if action >= self.n * self.n || s.fired[action] {
            return Err(EnvError::Contract(format!("battleship cell {action} is masked")));
        }
        s.steps += 1;
        s.fired[action] = true;
        s.last_action = Some(action);
        s.last_hit = s.ship[action];
        let mut reward = STEP_REWARD;
        let mut terminated = false;
        if s.last_hit {
            s.hits_remaining -= 1;
            if s.hits_remaining == 0 {
                reward += WIN_REWARD;
                terminated = true;
            }
        }
        let t = finish(reward, terminated, s.steps, self.max_steps());
        s.done = t.done();
        Ok(t)
    }

    fn write_obs(&self, s: &BattleshipState, level: ObservabilityLevel, out: &mut [f32]) {
        out.fill(0.0);
        let cells = self.n * self.n;
        match level {
            ObservabilityLevel::Partial => {
                out[0] = s.last_hit as u8 as f32;
                if let Some(a) = s.last_action {
                    out[1 + a] = 1.0;
                }
            }
            ObservabilityLevel::PerfectMemory | ObservabilityLevel::FullState => {
                for cell in 0..cells {
                    if s.fired[cell] {
                        let ch = if s.ship[cell] { 0 } else { 1 };
                        out[2 * cell + ch] = 1.0;
                    }
                }
                if level == ObservabilityLevel::FullState {
                    for (o, &sh) in out[2 * cells..].iter_mut().zip(&s.ship) {
                        *o = sh as u8 as f32;
                    }
                }
            }
        }
    }

    fn write_mask(&self, s: &BattleshipState, out: &mut [bool]) {
        for (o, &f) in out.iter_mut().zip(&s.fired) {
            *o = !f;
        }
    }
}

/// Occupancy counts of unfired cells over fleets consistent with the
/// observed hits and misses.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub counts: Vec<u64>,
    pub consistent: u64,
    /// True when every consistent fleet was enumerated.
    pub exact: bool,
}

impl Posterior {
    pub fn probability(&self, cell: usize) -> f64 {
        if self.consistent == 0 {
            0.0
        } else {
            self.counts[cell] as f64 / self.consistent as f64
        }
    }
}

impl Battleship {
    fn split_memory_grid(&self, grid: &[f32]) -> (Vec<bool>, Vec<bool>) {
        let cells = self.n * self.n;
        assert!(grid.len() >= 2 * cells, "perfect-memory grid too short");
        let hits = (0..cells).map(|c| grid[2 * c] > 0.5).collect();
        let misses = (0..cells).map(|c| grid[2 * c + 1] > 0.5).collect();
        (hits, misses)
    }

    fn joint_placement_count(&self) -> u128 {
        self.ships
            .iter()
            .map(|&l| self.placements(l).len() as u128)
            .product()
    }

    /// Posterior occupancy from a perfect-memory grid.
    ///
    /// Fleets are enumerated exactly when the joint placement space has at
    /// most `n_samples` members. Otherwise up to `n_samples` consistent fleets
    /// are drawn by rejection (budget `20 * n_samples` attempts); when
    /// rejection falls short the remainder comes from a Gibbs chain that
    /// resamples one ship at a time uniformly among placements keeping the
    /// fleet consistent, started from a randomized backtracking solution.
    pub fn posterior(&self, grid: &[f32], rng: &mut RngStream, n_samples: usize) -> Posterior {
        let (hits, misses) = self.split_memory_grid(grid);
        let cells = self.n * self.n;
        let mut counts = vec![0u64; cells];
        let mut consistent = 0u64;
        let exact = self.joint_placement_count() <= n_samples as u128;
        let mut tally = |occ: &[i32]| {
            if hits.iter().zip(occ).all(|(&h, &o)| !h || o >= 0) {
                consistent += 1;
                for (c, &o) in occ.iter().enumerate() {
                    if o >= 0 {
                        counts[c] += 1;
                    }
                }
                true
            } else {
                false
            }
        };
        if exact {
            let per_ship: Vec<Vec<Placement>> = self.ships.iter().map(|&l| self.placements(l)).collect();
            let mut occ = vec![-1i32; cells];
            self.enumerate(&per_ship, 0, &misses, &mut occ, &mut |o| {
                tally(o);
            });
        } else {
            let mut accepted = 0;
            for _ in 0..n_samples.saturating_mul(20) {
                if accepted >= n_samples {
                    break;
                }
                if let Some(occ) = self.try_place_once(rng, &misses) {
                    if tally(&occ) {
                        accepted += 1;
                    }
                }
            }
            if accepted < n_samples {
                if let Some(fleet) = self.find_consistent(&hits, &misses, rng) {
                    self.gibbs(fleet, &hits, &misses, rng, n_samples - accepted, &mut |o| {
                        tally(o);
                    });
                }
            }
        }
        for c in 0..cells {
            if hits[c] || misses[c] {
                counts[c] = 0;
            }
        }
        Posterior { counts, consistent, exact }
    }

    fn placement_fits(&self, p: &Placement, si: usize, occ: &[i32], misses: &[bool]) -> bool {
        p.cells(self.n).all(|c| {
            occ[c] < 0
                && !misses[c]
                && (self.allow_touching || self.neighbours(c).all(|nb| occ[nb] < 0 || occ[nb] == si as i32))
        })
    }

    /// Randomized depth-first search for one fleet consistent with the
    /// observations. Gives up after a fixed node budget.
    fn find_consistent(&self, hits: &[bool], misses: &[bool], rng: &mut RngStream) -> Option<Vec<Placement>> {
        let mut per_ship: Vec<Vec<Placement>> = self.ships.iter().map(|&l| self.placements(l)).collect();
        for ps in per_ship.iter_mut() {
            // Prefer placements that cover hits, random order otherwise.
            rng.shuffle(ps);
            ps.sort_by_key(|p| std::cmp::Reverse(p.cells(self.n).filter(|&c| hits[c]).count()));
        }
        let mut occ = vec![-1i32; self.n * self.n];
        let mut chosen = Vec::with_capacity(self.ships.len());
        let mut budget = 200_000usize;
        let total_hits = hits.iter().filter(|&&h| h).count();
        if self.dfs(&per_ship, 0, hits, misses, total_hits, &mut occ, &mut chosen, &mut budget) {
            Some(chosen)
        } else {
            None
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &self,
        per_ship: &[Vec<Placement>],
        si: usize,
        hits: &[bool],
        misses: &[bool],
        uncovered: usize,
        occ: &mut [i32],
        chosen: &mut Vec<Placement>,
        budget: &mut usize,
    ) -> bool {
        if si == per_ship.len() {
            return uncovered == 0;
        }
        let remaining: usize = self.ships[si..].iter().sum();
        if remaining < uncovered {
            return false;
        }
        for p in &per_ship[si] {
            if *budget == 0 {
                return false;
            }
            *budget -= 1;
            if !self.placement_fits(p, si, occ, misses) {
                continue;
            }
            let covered = p.cells(self.n).filter(|&c| hits[c]).count();
            for c in p.cells(self.n) {
                occ[c] = si as i32;
            }
            chosen.push(*p);
            if self.dfs(per_ship, si + 1, hits, misses, uncovered - covered, occ, chosen, budget) {
                return true;
            }
            chosen.pop();
            for c in p.cells(self.n) {
                occ[c] = -1;
            }
        }
        false
    }

    /// Gibbs sweeps over ship placements; `visit` sees the occupancy after
    /// every sweep. The first `burn_in` sweeps are discarded.
    fn gibbs(
        &self,
        mut fleet: Vec<Placement>,
        hits: &[bool],
        misses: &[bool],
        rng: &mut RngStream,
        samples: usize,
        visit: &mut impl FnMut(&[i32]),
    ) {
        let burn_in = 10;
        let per_ship: Vec<Vec<Placement>> = self.ships.iter().map(|&l| self.placements(l)).collect();
        let mut occ = vec![-1i32; self.n * self.n];
        for (si, p) in fleet.iter().enumerate() {
            for c in p.cells(self.n) {
                occ[c] = si as i32;
            }
        }
        let mut candidates = Vec::new();
        for sweep in 0..burn_in + samples {
            for si in 0..fleet.len() {
                for c in fleet[si].cells(self.n) {
                    occ[c] = -1;
                }
                candidates.clear();
                candidates.extend(per_ship[si].iter().filter(|p| {
                    self.placement_fits(p, si, &occ, misses)
                        && hits.iter().enumerate().all(|(c, &h)| {
                            !h || occ[c] >= 0 || p.cells(self.n).any(|pc| pc == c)
                        })
                }));
                // The current placement always qualifies, so this is non-empty.
                fleet[si] = candidates[rng.below(candidates.len())];
                for c in fleet[si].cells(self.n) {
                    occ[c] = si as i32;
                }
            }
            if sweep >= burn_in {
                visit(&occ);
            }
        }
    }

    fn enumerate(
        &self,
        per_ship: &[Vec<Placement>],
        si: usize,
        misses: &[bool],
        occ: &mut [i32],
        visit: &mut impl FnMut(&[i32]),
    ) {
        if si == per_ship.len() {
            visit(occ);
            return;
        }
        for p in &per_ship[si] {
            if !self.placement_fits(p, si, occ, misses) {
                continue;
            }
            for c in p.cells(self.n) {
                occ[c] = si as i32;
            }
            self.enumerate(per_ship, si + 1, misses, occ, visit);
            for c in p.cells(self.n) {
                occ[c] = -1;
            }
        }
    }

    /// Belief-based ceiling player: fire at the unfired cell with the highest
    /// posterior occupancy, lowest index on ties. Falls back to a uniform legal
    /// cell when no consistent fleet was found.
    pub fn belief_ceiling_action(&self, grid: &[f32], rng: &mut RngStream, n_samples: usize) -> Result<usize> {
        let (hits, misses) = self.split_memory_grid(grid);
        let legal: Vec<usize> = (0..self.n * self.n).filter(|&c| !hits[c] && !misses[c]).collect();
        if legal.is_empty() {
            return Err(EnvError::Contract("no legal cell left to fire at".into()));
        }
        let post = self.posterior(grid, rng, n_samples);
        if post.consistent == 0 {
            log::warn!("belief sampler found no consistent fleet; firing uniformly");
            return Ok(legal[rng.below(legal.len())]);
        }
        let mut best = legal[0];
        for &c in &legal {
            if post.counts[c] > post.counts[best] {
                best = c;
            }
        }
        Ok(best)
    }

    /// Play one episode with the belief ceiling player and return its reward sum.
    pub fn play_belief_episode(&self, rng: &mut RngStream, n_samples: usize) -> Result<f64> {
        let mut s = self.reset(rng);
        let mut grid = vec![0.0; 2 * self.n * self.n];
        let mut total = 0.0;
        loop {
            self.write_obs(&s, ObservabilityLevel::PerfectMemory, &mut grid);
            let a = self.belief_ceiling_action(&grid, rng, n_samples)?;
            let t = self.step(&mut s, a, rng)?;
            total += t.reward;
            if t.done() {
                return Ok(total);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(n: usize, len: usize) -> Battleship {
        Battleship::new(n, vec![len], true).unwrap()
    }

    #[test]
    fn standard_fleet_has_14_cells() {
        let e = Battleship::standard(10).unwrap();
        let mut rng = RngStream::new(1, 0);
        for _ in 0..500 {
            let s = e.reset(&mut rng);
            assert_eq!(s.ship.iter().filter(|&&b| b).count(), 14);
            assert_eq!(s.hits_remaining, 14);
        }
    }

    #[test]
    fn horizontal_ship_occupies_one_row() {
        let e = Battleship::standard(10).unwrap();
        let p = Placement { len: 5, row: 3, col: 2, horizontal: true };
        let cells: Vec<usize> = p.cells(e.n()).collect();
        assert_eq!(cells, vec![32, 33, 34, 35, 36]);
    }

    #[test]
    fn placement_is_uniform_over_legal_positions() {
        let e = tiny(5, 2);
        let placements = e.placements(2);
        assert_eq!(placements.len(), 40);
        let mut counts = std::collections::HashMap::new();
        let mut rng = RngStream::new(77, 0);
        let draws = 100_000;
        for _ in 0..draws {
            let g = e.place_ships(&mut rng);
            *counts.entry(g).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 40);
        for c in counts.values() {
            let f = *c as f64 / draws as f64;
            assert!((f - 1.0 / 40.0).abs() < 0.005, "freq {f}");
        }
    }

    #[test]
    fn observation_layouts() {
        let e = Battleship::standard(10).unwrap();
        let mut ship = vec![false; 100];
        for c in [0, 1] {
            ship[c] = true;
        }
        let mut s = e.state_with_ships(ship).unwrap();
        let mut rng = RngStream::new(0, 0);
        let p = e.observe(&s, ObservabilityLevel::Partial).unwrap();
        assert_eq!(p.len(), 101);
        assert!(p.iter().all(|&v| v == 0.0));

        e.step(&mut s, 23, &mut rng).unwrap();
        let p = e.observe(&s, ObservabilityLevel::Partial).unwrap();
        assert_eq!(p[0], 0.0);
        assert_eq!(p[1 + 23], 1.0);
        assert_eq!(p.iter().sum::<f32>(), 1.0);

        let t = e.step(&mut s, 0, &mut rng).unwrap();
        assert_eq!(t.reward, -1.0);
        assert!(!t.terminated);
        let m = e.observe(&s, ObservabilityLevel::PerfectMemory).unwrap();
        assert_eq!(m.len(), 200);
        let hit_layer: f32 = (0..100).map(|c| m[2 * c]).sum();
        assert_eq!(hit_layer as usize, s.num_hits());
        assert_eq!(m[2 * 23 + 1], 1.0);
        let f = e.observe(&s, ObservabilityLevel::FullState).unwrap();
        assert_eq!(f.len(), 300);
        assert_eq!(&f[..200], &m[..]);
        assert_eq!(f[200], 1.0);
        assert_eq!(f[201], 1.0);

        let t = e.step(&mut s, 1, &mut rng).unwrap();
        assert_eq!(t.reward, 99.0);
        assert!(t.terminated);
    }

    #[test]
    fn masked_action_is_contract_error() {
        let e = tiny(3, 2);
        let mut rng = RngStream::new(0, 0);
        let mut s = e.reset(&mut rng);
        let free = (0..9).find(|&c| !s.ship[c]).unwrap();
        e.step(&mut s, free, &mut rng).unwrap();
        assert!(matches!(e.step(&mut s, free, &mut rng), Err(EnvError::Contract(_))));
    }

    #[test]
    fn mask_counts() {
        let e = Battleship::standard(10).unwrap();
        let mut rng = RngStream::new(5, 0);
        let mut s = e.reset(&mut rng);
        let m = e.action_mask(&s);
        assert_eq!(m.count_legal(), 100);
        // Fire at every non-ship cell and all ship cells but one.
        let last_ship = (0..100).rev().find(|&c| s.ship[c]).unwrap();
        let mut shots = 0;
        for c in 0..100 {
            if c != last_ship {
                e.step(&mut s, c, &mut rng).unwrap();
                shots += 1;
            }
        }
        assert_eq!(shots, 99);
        let m = e.action_mask(&s);
        assert_eq!(m.count_legal(), 1);
        assert!(m.as_slice().iter().zip(&s.fired).all(|(&l, &f)| !(l && f)));
        let t = e.step(&mut s, last_ship, &mut rng).unwrap();
        assert!(t.terminated && !t.truncated);
    }

    #[test]
    fn clairvoyant_play_returns_86() {
        let e = Battleship::standard(10).unwrap();
        let mut rng = RngStream::new(3, 0);
        for _ in 0..20 {
            let mut s = e.reset(&mut rng);
            let targets: Vec<usize> = (0..100).filter(|&c| s.ship[c]).collect();
            let total: f64 = targets
                .iter()
                .map(|&c| e.step(&mut s, c, &mut rng).unwrap().reward)
                .sum();
            assert_eq!(total, 86.0);
        }
    }

    #[test]
    fn belief_player_ties_pick_lowest_index() {
        let e = tiny(2, 2);
        let grid = vec![0.0; 8];
        let mut rng = RngStream::new(0, 0);
        let post = e.posterior(&grid, &mut rng, 1000);
        assert!(post.exact);
        assert_eq!(post.consistent, 4);
        assert_eq!(post.counts, vec![2, 2, 2, 2]);
        assert_eq!(e.belief_ceiling_action(&grid, &mut rng, 1000).unwrap(), 0);
    }

    #[test]
    fn belief_after_hit_concentrates_on_neighbours() {
        let e = tiny(5, 2);
        let mut grid = vec![0.0; 50];
        let hit = 12;
        grid[2 * hit] = 1.0;
        let mut rng = RngStream::new(0, 0);
        let post = e.posterior(&grid, &mut rng, 1000);
        let neighbours = [7, 11, 13, 17];
        for c in 0..25 {
            if neighbours.contains(&c) {
                assert_eq!(post.counts[c], 1);
            } else {
                assert_eq!(post.counts[c], 0, "cell {c}");
            }
        }
        // Monte-Carlo path agrees on support.
        let mc = e.posterior(&grid, &mut rng, 10);
        assert!(!mc.exact);
        for c in 0..25 {
            if !neighbours.contains(&c) {
                assert_eq!(mc.counts[c], 0);
            }
        }
    }

    #[test]
    fn belief_never_fires_at_miss() {
        let e = tiny(2, 2);
        let mut grid = vec![0.0; 8];
        grid[1] = 1.0; // miss at cell 0
        let mut rng = RngStream::new(0, 0);
        let a = e.belief_ceiling_action(&grid, &mut rng, 1000).unwrap();
        assert_ne!(a, 0);
    }

    #[test]
    fn belief_player_finishes_standard_board() {
        let e = Battleship::standard(10).unwrap();
        let mut rng = RngStream::new(21, 0);
        let ret = e.play_belief_episode(&mut rng, 200).unwrap();
        assert!((-100.0..=86.0).contains(&ret));
        // Far better than random (expected about 100 - 96).
        assert!(ret > 20.0, "ret {ret}");
    }

    #[test]
    fn touching_flag_is_enforced() {
        let e = Battleship::new(4, vec![2, 2], false).unwrap();
        let mut rng = RngStream::new(2, 0);
        for _ in 0..2000 {
            let g = e.place_ships(&mut rng);
            // Two ships of length 2 that do not touch: every ship cell has
            // exactly one orthogonal/diagonal ship neighbour.
            for c in 0..16 {
                if g[c] {
                    let nb = e.neighbours(c).filter(|&x| x != c && g[x]).count();
                    assert_eq!(nb, 1);
                }
            }
        }
    }
}
