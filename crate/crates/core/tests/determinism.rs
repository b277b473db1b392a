use pomem_core::envs::maze::{Maze, MazeLayout};
use pomem_core::rng::tag_id;
use pomem_core::{make, AnyEnv, BatchEnv, Environment, ObservabilityLevel, RngStream};

fn families() -> Vec<AnyEnv> {
    let small_maze = MazeLayout::parse("small", "#######\n#..#..#\n#.....#\n#..#..#\n#######\n").unwrap();
    vec![
        make("tmaze_4").unwrap(),
        make("rocksample_5_4").unwrap(),
        make("battleship_10").unwrap(),
        // Short limit so truncation and auto-reset are exercised too.
        AnyEnv::Maze(Maze::new(small_maze, 40).unwrap()),
    ]
}

fn pick_legal(mask: &[bool], rng: &mut RngStream) -> usize {
    let legal: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
    legal[rng.below(legal.len())]
}

#[derive(Debug, PartialEq)]
struct Frame {
    obs: Vec<f32>,
    reward: f64,
    terminated: bool,
    truncated: bool,
}

/// Drive one standalone instance exactly as the batch engine would.
fn standalone(env: &AnyEnv, level: ObservabilityLevel, seed: u64, index: u64, steps: usize) -> Vec<Frame> {
    let mut rng = RngStream::new(seed, index);
    let mut policy = RngStream::new(seed, tag_id("policy") ^ index);
    let mut state = env.reset(&mut rng);
    let mut frames = Vec::with_capacity(steps);
    for _ in 0..steps {
        let mask = env.action_mask(&state);
        assert!(mask.count_legal() > 0);
        let a = pick_legal(mask.as_slice(), &mut policy);
        let t = env.step(&mut state, a, &mut rng).unwrap();
        assert!(!(t.terminated && t.truncated));
        if t.done() {
            state = env.reset(&mut rng);
        }
        frames.push(Frame {
            obs: env.observe(&state, level).unwrap(),
            reward: t.reward,
            terminated: t.terminated,
            truncated: t.truncated,
        });
    }
    frames
}

fn batched(env: &AnyEnv, level: ObservabilityLevel, seed: u64, n: usize, steps: usize, workers: usize) -> Vec<Vec<Frame>> {
    let mut batch = BatchEnv::with_workers(env.clone(), level, n, seed, workers).unwrap();
    let mut policies: Vec<RngStream> = (0..n as u64)
        .map(|i| RngStream::new(seed, tag_id("policy") ^ i))
        .collect();
    let mut out: Vec<Vec<Frame>> = (0..n).map(|_| Vec::with_capacity(steps)).collect();
    let mut actions = vec![0; n];
    for _ in 0..steps {
        for i in 0..n {
            actions[i] = pick_legal(batch.mask_row(i), &mut policies[i]);
        }
        let view = batch.step(&actions).unwrap();
        let d = view.obs.len() / n;
        for i in 0..n {
            out[i].push(Frame {
                obs: view.obs[i * d..(i + 1) * d].to_vec(),
                reward: view.rewards[i],
                terminated: view.terminated[i],
                truncated: view.truncated[i],
            });
        }
    }
    out
}

#[test]
fn batch_matches_standalone_for_every_family() {
    for env in families() {
        for &level in env.levels() {
            for seed in 0..6u64 {
                let n = 3;
                let b1 = batched(&env, level, seed, n, 300, 1);
                let b4 = batched(&env, level, seed, n, 300, 4);
                assert_eq!(b1, b4, "{} worker count changed results", env.id());
                for i in 0..n {
                    let solo = standalone(&env, level, seed, i as u64, 300);
                    assert_eq!(b1[i], solo, "{} {level} seed {seed} instance {i}", env.id());
                }
            }
        }
    }
}

#[test]
fn identical_seeds_give_identical_trajectories() {
    for env in families() {
        let level = ObservabilityLevel::Partial;
        for seed in 0..100u64 {
            let a = standalone(&env, level, seed, 0, 1000);
            let b = standalone(&env, level, seed, 0, 1000);
            assert_eq!(a, b);
        }
    }
}

#[test]
fn observations_are_finite_and_binary() {
    for env in families() {
        for &level in env.levels() {
            for frame in standalone(&env, level, 17, 0, 2000) {
                assert!(frame.obs.iter().all(|v| v.is_finite() && (*v == 0.0 || *v == 1.0)));
                let (lo, hi) = env.reward_range();
                assert!(frame.reward >= lo && frame.reward <= hi);
            }
        }
    }
}

#[test]
fn auto_reset_never_leaks_terminal_observation() {
    // T-Maze: every post-termination row must be a start-cell observation.
    let env = make("tmaze_2").unwrap();
    let frames = batched(&env, ObservabilityLevel::Partial, 5, 8, 2000, 1);
    let mut resets = 0;
    for inst in frames {
        for f in inst {
            if f.terminated || f.truncated {
                resets += 1;
                assert_eq!(f.obs[0] + f.obs[1], 1.0);
                assert_eq!(f.obs[2] + f.obs[3], 0.0);
            }
        }
    }
    assert!(resets > 0);
}
