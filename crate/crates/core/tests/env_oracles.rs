use std::collections::HashMap;

use pomem_core::envs::battleship::Battleship;
use pomem_core::envs::maze::{Facing, Maze, MazeLayout, FORWARD, TURN_LEFT, TURN_RIGHT};
use pomem_core::envs::rocksample::{self, sensor_accuracy, RockSample};
use pomem_core::{Environment, ObservabilityLevel, RngStream};

// ---------------------------------------------------------------- RockSample

/// Minimal independent RockSample reward model: walks a script and sums rewards.
fn brute_force_rocksample(
    n: usize,
    start: (usize, usize),
    rocks: &[((usize, usize), bool)],
    script: &[usize],
) -> f64 {
    let mut pos = start;
    let mut quality: HashMap<(usize, usize), bool> = rocks.iter().copied().collect();
    let mut total = 0.0;
    for &a in script {
        match a {
            0 => pos.0 = pos.0.saturating_sub(1),
            1 => pos.0 = (pos.0 + 1).min(n - 1),
            2 if pos.1 + 1 == n => {
                total += 10.0;
                break;
            }
            2 => pos.1 += 1,
            3 => pos.1 = pos.1.saturating_sub(1),
            4 => match quality.get_mut(&pos) {
                Some(q) if *q => {
                    total += 10.0;
                    *q = false;
                }
                _ => total -= 10.0,
            },
            _ => {}
        }
    }
    total
}

fn route(from: (usize, usize), to: (usize, usize)) -> Vec<usize> {
    let mut acts = vec![];
    let (mut r, mut c) = from;
    while r > to.0 {
        acts.push(rocksample::NORTH);
        r -= 1;
    }
    while r < to.0 {
        acts.push(rocksample::SOUTH);
        r += 1;
    }
    while c > to.1 {
        acts.push(rocksample::WEST);
        c -= 1;
    }
    while c < to.1 {
        acts.push(rocksample::EAST);
        c += 1;
    }
    acts
}

#[test]
fn rocksample_sample_all_then_exit_matches_brute_force() {
    let n = 4;
    let env = RockSample::new(n, 2).unwrap();
    let start = env.start_cell();
    let mut rng = RngStream::new(0, 0);
    for a in 0..n * n {
        for b in 0..n * n {
            if a == b {
                continue;
            }
            let pa = (a / n, a % n);
            let pb = (b / n, b % n);
            for parity in 0..4u8 {
                let good = vec![parity & 1 == 1, parity & 2 == 2];
                let mut script = route(start, pa);
                script.push(rocksample::SAMPLE);
                script.extend(route(pa, pb));
                script.push(rocksample::SAMPLE);
                script.extend(route(pb, (pb.0, n - 1)));
                script.push(rocksample::EAST);

                let mut s = env.state_with_rocks(vec![pa, pb], good.clone()).unwrap();
                let mut total = 0.0;
                let mut ended = false;
                for &act in &script {
                    let t = env.step(&mut s, act, &mut rng).unwrap();
                    total += t.reward;
                    if t.done() {
                        ended = t.terminated;
                        break;
                    }
                }
                assert!(ended);
                let n_good = good.iter().filter(|&&g| g).count() as f64;
                let formula = 10.0 * (n_good - (2.0 - n_good)) + 10.0;
                let brute = brute_force_rocksample(n, start, &[(pa, good[0]), (pb, good[1])], &script);
                assert_eq!(total, formula);
                assert_eq!(total, brute);
            }
        }
    }
}

#[test]
fn rocksample_sensor_matches_law() {
    let env = RockSample::new(11, 2).unwrap();
    let max_d = env.max_distance();
    // (agent, rock 0) pairs at distance 0, 1 and max_d.
    let cases = [((5, 0), (5, 0), 0.0), ((5, 0), (5, 1), 1.0), ((0, 0), (10, 10), max_d)];
    let mut rng = RngStream::new(2024, 1);
    for (agent, rock, d) in cases {
        let other = if rock == (3, 3) { (4, 4) } else { (3, 3) };
        let draws = 100_000;
        let mut correct = 0;
        for i in 0..draws {
            let good = i % 2 == 0;
            let mut s = env.state_with_rocks(vec![rock, other], vec![good, false]).unwrap();
            s.agent = agent;
            env.step(&mut s, rocksample::FIRST_CHECK, &mut rng).unwrap();
            if s.last_sensor[0] == good {
                correct += 1;
            }
        }
        let freq = correct as f64 / draws as f64;
        let expected = sensor_accuracy(d, max_d);
        assert!((freq - expected).abs() < 0.01, "d = {d}: {freq} vs {expected}");
    }
}

// ---------------------------------------------------------------- Battleship

/// Expected return of uniform-legal play given `u` unfired cells of which
/// `m` hold unhit ship parts (exchangeability makes this a sufficient state).
fn random_play_value(u: usize, m: usize, memo: &mut HashMap<(usize, usize), f64>) -> f64 {
    if let Some(&v) = memo.get(&(u, m)) {
        return v;
    }
    let uf = u as f64;
    let hit = m as f64 / uf;
    let hit_value = if m == 1 { 100.0 } else { random_play_value(u - 1, m - 1, memo) };
    let miss_value = if u > m { random_play_value(u - 1, m, memo) } else { 0.0 };
    let v = -1.0 + hit * hit_value + (1.0 - hit) * miss_value;
    memo.insert((u, m), v);
    v
}

/// Exhaustive DP over (placement, fired-set) pairs with no symmetry shortcut.
fn exhaustive_value(env: &Battleship) -> f64 {
    let n2 = env.n() * env.n();
    assert!(n2 <= 16);
    let placements = env.placements(env.ships()[0]);
    let mut total = 0.0;
    for p in &placements {
        let ship: u32 = p.cells(env.n()).fold(0, |acc, c| acc | (1 << c));
        let mut memo = HashMap::new();
        total += fired_value(0, ship, n2, &mut memo);
    }
    total / placements.len() as f64
}

fn fired_value(fired: u32, ship: u32, n2: usize, memo: &mut HashMap<u32, f64>) -> f64 {
    if let Some(&v) = memo.get(&fired) {
        return v;
    }
    let legal: Vec<usize> = (0..n2).filter(|&c| fired & (1 << c) == 0).collect();
    let mut v = 0.0;
    for &c in &legal {
        let next = fired | (1 << c);
        let r = if next & ship == ship {
            99.0
        } else {
            -1.0 + fired_value(next, ship, n2, memo)
        };
        v += r / legal.len() as f64;
    }
    memo.insert(fired, v);
    v
}

#[test]
fn battleship_random_play_dp_agrees_with_exhaustive_enumeration() {
    for (n, len) in [(3, 2), (4, 2), (3, 3), (4, 3)] {
        let env = Battleship::new(n, vec![len], true).unwrap();
        let exhaustive = exhaustive_value(&env);
        let reduced = random_play_value(n * n, len, &mut HashMap::new());
        assert!((exhaustive - reduced).abs() < 1e-9, "{n}x{n}: {exhaustive} vs {reduced}");
    }
}

#[test]
fn battleship_random_play_matches_dp_on_small_board() {
    let env = Battleship::new(5, vec![2], true).unwrap();
    let expected = random_play_value(25, 2, &mut HashMap::new());
    assert!((expected - (100.0 - 52.0 / 3.0)).abs() < 1e-9);
    let mut rng = RngStream::new(31, 0);
    let episodes = 20_000;
    let mut sum = 0.0;
    for _ in 0..episodes {
        let mut s = env.reset(&mut rng);
        loop {
            let mask = env.action_mask(&s);
            let legal: Vec<usize> = (0..25).filter(|&c| mask.is_legal(c)).collect();
            let t = env.step(&mut s, legal[rng.below(legal.len())], &mut rng).unwrap();
            sum += t.reward;
            if t.done() {
                break;
            }
        }
    }
    let mean = sum / episodes as f64;
    assert!((mean - expected).abs() < 0.5, "{mean} vs {expected}");
}

#[test]
fn battleship_perfect_memory_is_markov() {
    let env = Battleship::new(3, vec![2], true).unwrap();
    let mut rng = RngStream::new(0, 0);
    let fleets: Vec<Vec<bool>> = env
        .placements(2)
        .iter()
        .map(|p| {
            let mut g = vec![false; 9];
            for c in p.cells(3) {
                g[c] = true;
            }
            g
        })
        .collect();

    // history (actions + hit bits) -> live states consistent with it
    let mut frontier: HashMap<Vec<(usize, bool)>, Vec<_>> = HashMap::new();
    frontier.insert(vec![], fleets.iter().map(|f| env.state_with_ships(f.clone()).unwrap()).collect());
    let mut by_grid: HashMap<Vec<u8>, Vec<(usize, f64, f64)>> = HashMap::new();
    let mut checked = 0;
    for _depth in 0..4 {
        let mut next: HashMap<Vec<(usize, bool)>, Vec<_>> = HashMap::new();
        for (history, states) in &frontier {
            let grid: Vec<u8> = env
                .observe(&states[0], ObservabilityLevel::PerfectMemory)
                .unwrap()
                .iter()
                .map(|&v| v as u8)
                .collect();
            // Next-step law under a uniform prior over consistent fleets.
            let mut law = vec![];
            for a in 0..9 {
                if !env.action_mask(&states[0]).is_legal(a) {
                    continue;
                }
                let mut hits = 0.0;
                let mut wins = 0.0;
                for s in states {
                    let mut s2 = s.clone();
                    let t = env.step(&mut s2, a, &mut rng).unwrap();
                    hits += s2.last_hit as u8 as f64;
                    wins += t.terminated as u8 as f64;
                    if !t.done() {
                        let mut h = history.clone();
                        h.push((a, s2.last_hit));
                        next.entry(h).or_default().push(s2);
                    }
                }
                let k = states.len() as f64;
                law.push((a, hits / k, wins / k));
            }
            if let Some(prev) = by_grid.get(&grid) {
                assert_eq!(prev, &law, "history {history:?}");
                checked += 1;
            } else {
                by_grid.insert(grid, law);
            }
        }
        frontier = next;
    }
    assert!(checked > 100, "only {checked} aliased histories compared");
}

// ---------------------------------------------------------------- Maze

const ROOM: &str = "\
########
#......#
#.##...#
#......#
#...#..#
########
";

fn shifted(text: &str, pad_top: usize, pad_left: usize) -> String {
    let width = text.lines().next().unwrap().len() + pad_left;
    let mut out = String::new();
    for _ in 0..pad_top {
        out.push_str(&"#".repeat(width));
        out.push('\n');
    }
    for line in text.lines() {
        out.push_str(&"#".repeat(pad_left));
        out.push_str(line);
        out.push('\n');
    }
    out
}

#[test]
fn maze_partial_view_is_translation_invariant() {
    let a = Maze::new(MazeLayout::parse("a", ROOM).unwrap(), 500).unwrap();
    let b = Maze::new(MazeLayout::parse("b", &shifted(ROOM, 3, 2)).unwrap(), 500).unwrap();
    let mut rng = RngStream::new(8, 0);
    let mut policy = RngStream::new(8, 1);
    for _ in 0..50 {
        let sa0 = a.reset(&mut rng);
        let mut sa = sa0.clone();
        let mut sb = b.state_at(
            (sa0.agent.0 + 3, sa0.agent.1 + 2),
            sa0.facing,
            (sa0.goal.0 + 3, sa0.goal.1 + 2),
        );
        for _ in 0..60 {
            assert_eq!(
                a.observe(&sa, ObservabilityLevel::Partial).unwrap(),
                b.observe(&sb, ObservabilityLevel::Partial).unwrap()
            );
            let act = [FORWARD, TURN_LEFT, TURN_RIGHT][policy.below(3)];
            let ta = a.step(&mut sa, act, &mut rng).unwrap();
            let tb = b.step(&mut sb, act, &mut rng).unwrap();
            assert_eq!(ta, tb);
            if ta.done() {
                break;
            }
        }
    }
}

#[test]
fn maze_full_state_round_trips_exhaustively() {
    let layout = MazeLayout::parse("six", "######\n#....#\n#.#..#\n#..#.#\n#....#\n######\n").unwrap();
    let env = Maze::new(layout.clone(), 100).unwrap();
    let free = layout.free_cells().to_vec();
    let mut count = 0;
    for &agent in &free {
        for &goal in &free {
            if agent == goal {
                continue;
            }
            for facing in Facing::ALL {
                let s = env.state_at(agent, facing, goal);
                let obs = env.observe(&s, ObservabilityLevel::FullState).unwrap();
                assert_eq!(env.decode_full(&obs), Some((agent, facing, goal)));
                count += 1;
            }
        }
    }
    assert_eq!(count, free.len() * (free.len() - 1) * 4);
}
