use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use pomem_agents::{save_checkpoint, train};
use pomem_core::bench::{run_throughput, to_csv};
use pomem_core::{make, Environment, ObservabilityLevel};
use pomem_harness::curve::final_return;
use pomem_harness::record::EpisodePoint;
use pomem_harness::{
    confidence_interval, run_protocol, AgentKind, ExperimentSpec, Metric, ProtocolOptions, RunConfig, RunRecord,
};
use rayon::prelude::*;

use crate::config::CliConfig;
use crate::error::CliError;

/// Share of the run, at the end, that the final return averages over.
pub const FINAL_FRACTION: f64 = 0.1;

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Runtime(format!("cannot build worker pool: {e}")))
}

pub fn env_info(id: &str) -> Result<String, CliError> {
    let caps = make(id)?.capabilities();
    let mut s = String::new();
    let _ = writeln!(s, "id={}", caps.id);
    let _ = writeln!(s, "num_actions={}", caps.num_actions);
    for (level, dim) in &caps.obs_dims {
        let _ = writeln!(s, "obs_dim_{level}={dim}");
    }
    let _ = writeln!(s, "reward_min={}", caps.reward_range.0);
    let _ = writeln!(s, "reward_max={}", caps.reward_range.1);
    let _ = writeln!(s, "gamma={}", caps.gamma);
    let _ = writeln!(s, "max_steps={}", caps.max_steps);
    Ok(s)
}

#[derive(Debug, Clone)]
pub struct TrainRequest {
    pub env: String,
    pub agent: AgentKind,
    pub level: ObservabilityLevel,
    pub config: CliConfig,
    pub out_dir: PathBuf,
    pub workers: usize,
}

#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub fingerprint: String,
    pub records: Vec<PathBuf>,
    pub checkpoints: Vec<PathBuf>,
    pub final_returns: Vec<f64>,
    pub episodes: usize,
    pub wall_seconds: f64,
}

pub fn resolve(req: &TrainRequest) -> Result<RunConfig, CliError> {
    let cfg = &req.config;
    if cfg.double_critic && req.agent != AgentKind::Ld {
        return Err(CliError::Usage(format!(
            "double_critic needs --agent ld (got --agent {})",
            req.agent
        )));
    }
    cfg.validate()?;
    let env = make(&req.env)?;
    env.check_level(req.level)?;
    Ok(RunConfig::new(req.env.clone(), req.agent, cfg.train_config(req.level, 1)))
}

/// Seeds `seed .. seed + n_seeds`, one record file per seed.
pub fn run_train(req: &TrainRequest) -> Result<TrainSummary, CliError> {
    let run = resolve(req)?;
    let fp = run.fingerprint();
    let stem = &fp[..12];
    std::fs::create_dir_all(&req.out_dir)?;
    let start = Instant::now();
    let seeds: Vec<u64> = (0..req.config.n_seeds as u64).map(|i| req.config.seed + i).collect();
    let one = |seed: u64| -> Result<(RunRecord, PathBuf, Option<PathBuf>), CliError> {
        let t0 = Instant::now();
        let train_cfg = pomem_agents::TrainConfig {
            seed,
            ..run.train.clone()
        };
        let out = train(make(&run.env)?, &train_cfg)?;
        let rec = RunRecord {
            fingerprint: fp.clone(),
            seed,
            total_steps: train_cfg.total_steps,
            points: out
                .episodes
                .iter()
                .map(|e| EpisodePoint {
                    env_step: e.env_step,
                    discounted: e.discounted,
                    undiscounted: e.undiscounted,
                })
                .collect(),
            wall_seconds: t0.elapsed().as_secs_f64(),
        };
        let path = req.out_dir.join(format!("{stem}-seed{seed}.txt"));
        rec.save(&path)?;
        let ckpt = if req.config.save_checkpoints {
            let p = req.out_dir.join(format!("{stem}-seed{seed}.ckpt"));
            save_checkpoint(&out.model, &fp, &p)?;
            Some(p)
        } else {
            None
        };
        log::info!("seed {seed}: {} episodes in {:.1}s", rec.points.len(), rec.wall_seconds);
        Ok((rec, path, ckpt))
    };
    let results: Vec<_> = pool(req.workers)?.install(|| seeds.par_iter().map(|&s| one(s)).collect());
    let mut summary = TrainSummary {
        fingerprint: fp,
        records: Vec::new(),
        checkpoints: Vec::new(),
        final_returns: Vec::new(),
        episodes: 0,
        wall_seconds: 0.0,
    };
    for r in results {
        let (rec, path, ckpt) = r?;
        summary.episodes += rec.points.len();
        if let Some(v) = final_return(&rec.series(Metric::Discounted), rec.total_steps, FINAL_FRACTION) {
            summary.final_returns.push(v);
        }
        summary.records.push(path);
        summary.checkpoints.extend(ckpt);
    }
    summary.wall_seconds = start.elapsed().as_secs_f64();
    Ok(summary)
}

impl TrainSummary {
    pub fn line(&self, req: &TrainRequest) -> String {
        let mut s = format!(
            "env={} agent={} level={} fingerprint={} seeds={} total_steps={} episodes={}",
            req.env,
            req.agent,
            req.level,
            self.fingerprint,
            req.config.n_seeds,
            req.config.total_steps,
            self.episodes
        );
        match confidence_interval(&self.final_returns, 0.95) {
            Ok(ci) => {
                let _ = write!(s, " final_mean={} final_ci_lo={} final_ci_hi={}", ci.mean, ci.lo, ci.hi);
            }
            Err(_) => {
                if let Some(v) = self.final_returns.first() {
                    let _ = write!(s, " final_mean={v}");
                }
            }
        }
        let _ = write!(s, " out={} wall_seconds={:.3}", req.out_dir.display(), self.wall_seconds);
        s
    }
}

/// Runs the protocol in `spec_path`; returns one summary line per arm and
/// per memory agent's gap.
pub fn run_protocol_file(spec_path: &Path, out_dir: &Path, workers: usize) -> Result<String, CliError> {
    let spec = ExperimentSpec::parse(&read_text(spec_path)?)?;
    let start = Instant::now();
    let report = run_protocol(
        &spec,
        &ProtocolOptions {
            workers,
            out_dir: Some(out_dir.to_path_buf()),
        },
    )?;
    let mut s = String::new();
    for a in &report.arms {
        let _ = write!(s, "arm={} agent={} level={} fingerprint={} auc={}", a.arm.name, a.arm.agent, a.arm.level, a.best.fingerprint(), a.auc);
        if let Some(ci) = a.final_ci {
            let _ = write!(s, " final_mean={} final_ci_lo={} final_ci_hi={}", ci.mean, ci.lo, ci.hi);
        }
        s.push('\n');
    }
    for (name, g) in &report.gaps {
        let _ = writeln!(
            s,
            "env={} agent={name} gap={} gap_ci_lo={} gap_ci_hi={} closure={} memory_improvable={} failures={} wall_seconds={:.3}",
            spec.env,
            g.gap,
            g.gap_ci.0,
            g.gap_ci.1,
            g.closure,
            g.memory_improvable,
            report.failures.len(),
            start.elapsed().as_secs_f64()
        );
    }
    Ok(s)
}

pub fn bench(env_id: &str, level: ObservabilityLevel, envs: &[usize], steps: u64, workers: usize, seed: u64) -> Result<String, CliError> {
    if envs.is_empty() || envs.contains(&0) {
        return Err(CliError::Usage("--envs needs positive batch sizes".into()));
    }
    if steps == 0 {
        return Err(CliError::Usage("--steps must be positive".into()));
    }
    let env = make(env_id)?;
    let reports = run_throughput(&env, level, envs, steps, workers, seed)?;
    Ok(to_csv(&reports))
}
