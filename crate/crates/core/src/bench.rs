//! Wall-clock throughput of the batch engine as a function of batch size.

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use crate::env::Environment;
use crate::error::Result;
use crate::rng::{tag_id, RngStream};
use crate::spaces::ObservabilityLevel;
use crate::vector::{worker_pool, BatchEnv};

#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputReport {
    pub num_envs: usize,
    /// Requested environment transitions, summed over the batch.
    pub total_steps: u64,
    /// Batch steps executed: `ceil(total_steps / num_envs)`.
    pub batch_steps: u64,
    pub wall_seconds: f64,
    /// Transitions actually executed per second.
    pub steps_per_second: f64,
    /// Amortised wall time of one transition of one instance.
    pub per_env_step_seconds: f64,
}

impl ThroughputReport {
    pub fn new(num_envs: usize, total_steps: u64, wall_seconds: f64) -> Self {
        let batch_steps = total_steps.div_ceil(num_envs as u64);
        let executed = (batch_steps * num_envs as u64) as f64;
        let wall = wall_seconds.max(f64::MIN_POSITIVE);
        Self {
            num_envs,
            total_steps,
            batch_steps,
            wall_seconds,
            steps_per_second: executed / wall,
            per_env_step_seconds: wall / executed,
        }
    }
}

pub const CSV_HEADER: &str = "num_envs,total_steps,batch_steps,wall_seconds,steps_per_second,per_env_step_seconds";

pub fn to_csv(reports: &[ThroughputReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:e}",
            r.num_envs, r.total_steps, r.batch_steps, r.wall_seconds, r.steps_per_second, r.per_env_step_seconds
        );
    }
    out
}

/// Time `total_steps` transitions for each batch size, choosing uniformly
/// random legal actions from a stream separate from the environments'.
pub fn run_throughput<E: Environment + Clone>(
    env: &E,
    level: ObservabilityLevel,
    num_envs: &[usize],
    total_steps: u64,
    workers: usize,
    seed: u64,
) -> Result<Vec<ThroughputReport>> {
    let pool = worker_pool(workers)?;
    let shared = Arc::new(env.clone());
    let mut reports = Vec::with_capacity(num_envs.len());
    for &n in num_envs {
        let mut batch = BatchEnv::with_pool(shared.clone(), level, n, seed, pool.clone())?;
        let mut policy = RngStream::new(seed, tag_id("bench-policy"));
        let a_dim = batch.num_actions();
        let mut actions = vec![0usize; n];
        let mut legal = Vec::with_capacity(a_dim);
        let batch_steps = total_steps.div_ceil(n as u64);
        let start = Instant::now();
        for _ in 0..batch_steps {
            for (i, a) in actions.iter_mut().enumerate() {
                let mask = batch.mask_row(i);
                *a = if mask.iter().all(|&m| m) {
                    policy.below(a_dim)
                } else {
                    legal.clear();
                    legal.extend((0..a_dim).filter(|&j| mask[j]));
                    legal[policy.below(legal.len())]
                };
            }
            batch.step(&actions)?;
        }
        let wall = start.elapsed().as_secs_f64();
        reports.push(ThroughputReport::new(n, total_steps, wall));
    }
    Ok(reports)
}
