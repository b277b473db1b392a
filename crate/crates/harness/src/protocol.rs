//! Sweep, select, rerun: floor and ceiling memoryless agents plus each memory
//! agent, then the improvability gap of every memory agent.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use pomem_agents::{train, AgentError, PpoConfig, TrainConfig};
use pomem_core::{make, Environment, ObservabilityLevel};
use rayon::prelude::*;

use crate::config::{AgentKind, RunConfig};
use crate::curve::{auc, final_return, grid, mean_curve, resample, GRID_POINTS};
use crate::error::{HarnessError, Result};
use crate::gap::{improvability_gap, GapReport};
use crate::record::{EpisodePoint, RunRecord};
use crate::select::{auc_select, ConfigCurves};
use crate::spec::ExperimentSpec;
use crate::stats::{confidence_interval, Interval};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arm {
    pub name: String,
    pub agent: AgentKind,
    pub level: ObservabilityLevel,
    pub action_concat: bool,
}

/// Floor, ceiling, then one arm per memory agent.
pub fn arms(spec: &ExperimentSpec) -> Result<Vec<Arm>> {
    let env = make(&spec.env)?;
    let ceiling = match spec.ceiling_level {
        Some(l) => l,
        None => [ObservabilityLevel::FullState, ObservabilityLevel::PerfectMemory]
            .into_iter()
            .find(|&l| env.supports(l))
            .ok_or_else(|| HarnessError::Config(format!("{} has no full-information level", spec.env)))?,
    };
    env.check_level(ceiling)?;
    env.check_level(spec.level)?;
    let mut out = vec![
        Arm {
            name: "floor".into(),
            agent: AgentKind::Memoryless,
            level: ObservabilityLevel::Partial,
            action_concat: false,
        },
        Arm {
            name: "ceiling".into(),
            agent: AgentKind::Memoryless,
            level: ceiling,
            action_concat: false,
        },
    ];
    for &a in &spec.agents {
        out.push(Arm {
            name: a.to_string(),
            agent: a,
            level: spec.level,
            action_concat: spec.action_concat,
        });
    }
    Ok(out)
}

/// Every grid point of an arm, trained for `total_steps`.
pub fn arm_configs(spec: &ExperimentSpec, arm: &Arm, total_steps: u64) -> Vec<RunConfig> {
    let base = TrainConfig {
        level: arm.level,
        num_envs: spec.num_envs,
        num_steps: spec.num_steps,
        total_steps,
        hidden_size: spec.hidden_size,
        action_concat: arm.action_concat,
        ppo: PpoConfig {
            alpha: spec.alpha,
            ..PpoConfig::default()
        },
        ..TrainConfig::default()
    };
    let (l1, beta): (&[f64], &[f64]) = if arm.agent == AgentKind::Ld {
        (&spec.lambda1, &spec.beta)
    } else {
        (&[f64::NAN], &[f64::NAN])
    };
    let mut out = Vec::new();
    for &lr in &spec.lr {
        for &lam0 in &spec.lambda0 {
            for &lam1 in l1 {
                for &b in beta {
                    let mut t = TrainConfig {
                        lr,
                        ..base.clone()
                    };
                    t.ppo.lambda0 = lam0;
                    if !lam1.is_nan() {
                        t.ppo.lambda1 = lam1;
                        t.ppo.ld_weight = b;
                    }
                    out.push(RunConfig::new(spec.env.clone(), arm.agent, t));
                }
            }
        }
    }
    out
}

/// Train one seed and turn its episodes into a record. Non-finite returns
/// count as a failed run.
pub fn run_one(cfg: &RunConfig, seed: u64) -> Result<RunRecord> {
    let env = make(&cfg.env)?;
    let train_cfg = TrainConfig {
        seed,
        workers: 1,
        ..cfg.train.clone()
    };
    let start = Instant::now();
    let out = train(env, &train_cfg)?;
    let points: Vec<EpisodePoint> = out
        .episodes
        .iter()
        .map(|e| EpisodePoint {
            env_step: e.env_step,
            discounted: e.discounted,
            undiscounted: e.undiscounted,
        })
        .collect();
    if points.iter().any(|p| !p.discounted.is_finite() || !p.undiscounted.is_finite()) {
        return Err(AgentError::NonFinite {
            what: "episode return",
            update: 0,
        }
        .into());
    }
    Ok(RunRecord {
        fingerprint: cfg.fingerprint(),
        seed,
        total_steps: train_cfg.total_steps,
        points,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone)]
pub struct ArmReport {
    pub arm: Arm,
    /// `(fingerprint, AUC)` of each swept configuration that completed.
    pub sweep: Vec<(String, f64)>,
    pub best: RunConfig,
    pub finals: Vec<RunRecord>,
    /// Resampled curve of each final run.
    pub curves: Vec<Vec<f64>>,
    pub final_returns: Vec<f64>,
    /// Over seeds; `None` with a single final seed.
    pub final_ci: Option<Interval>,
    pub auc: f64,
}

#[derive(Debug, Clone)]
pub struct ProtocolReport {
    pub spec: ExperimentSpec,
    pub grid: Vec<f64>,
    pub arms: Vec<ArmReport>,
    /// One per memory agent.
    pub gaps: Vec<(String, GapReport)>,
    /// Runs that failed, as `arm fingerprint seed: error`.
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct ProtocolOptions {
    /// Concurrent training runs.
    pub workers: usize,
    /// Where to write record files and reports.
    pub out_dir: Option<PathBuf>,
}

struct Job {
    arm: usize,
    cfg: usize,
    seed: u64,
}

fn run_jobs(jobs: &[Job], configs: &[Vec<RunConfig>], pool: Option<&rayon::ThreadPool>) -> Vec<Result<RunRecord>> {
    let exec = |j: &Job| run_one(&configs[j.arm][j.cfg], j.seed);
    match pool {
        Some(p) => p.install(|| jobs.par_iter().map(exec).collect()),
        None => jobs.iter().map(exec).collect(),
    }
}

fn curve_of(spec: &ExperimentSpec, r: &RunRecord) -> Option<Vec<f64>> {
    resample(&r.series(spec.metric), r.total_steps, GRID_POINTS)
}

pub fn run_protocol(spec: &ExperimentSpec, opts: &ProtocolOptions) -> Result<ProtocolReport> {
    spec.validate()?;
    let arms = arms(spec)?;
    let pool = if opts.workers > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(opts.workers)
                .build()
                .map_err(|e| HarnessError::Config(format!("cannot build worker pool: {e}")))?,
        )
    } else {
        None
    };
    let mut failures = Vec::new();

    // Sweep. Arms with a single configuration skip straight to the final runs.
    let sweep_steps = spec.sweep_steps();
    let sweep_cfgs: Vec<Vec<RunConfig>> = arms.iter().map(|a| arm_configs(spec, a, sweep_steps)).collect();
    let mut jobs = Vec::new();
    for (ai, cfgs) in sweep_cfgs.iter().enumerate() {
        if cfgs.len() > 1 {
            for ci in 0..cfgs.len() {
                for s in 0..spec.n_sweep {
                    jobs.push(Job {
                        arm: ai,
                        cfg: ci,
                        seed: spec.seed + s as u64,
                    });
                }
            }
        }
    }
    log::info!("sweep: {} runs", jobs.len());
    let results = run_jobs(&jobs, &sweep_cfgs, pool.as_ref());
    let sweep_grid = grid(sweep_steps, GRID_POINTS);
    let mut best_idx = vec![0usize; arms.len()];
    let mut sweep_aucs: Vec<Vec<(String, f64)>> = vec![Vec::new(); arms.len()];
    for (ai, cfgs) in sweep_cfgs.iter().enumerate() {
        if cfgs.len() <= 1 {
            continue;
        }
        let mut groups = Vec::new();
        let mut idx = Vec::new();
        for ci in 0..cfgs.len() {
            let mut curves = Vec::new();
            let mut ok = true;
            for (j, r) in jobs.iter().zip(&results) {
                if j.arm != ai || j.cfg != ci {
                    continue;
                }
                match r.as_ref().map_err(|e| e.to_string()).and_then(|r| curve_of(spec, r).ok_or_else(|| "no episode finished".to_string())) {
                    Ok(c) => curves.push(c),
                    Err(e) => {
                        let msg = format!("{} {} seed {}: {e}", arms[ai].name, cfgs[ci].fingerprint(), j.seed);
                        log::warn!("sweep run failed, dropping its configuration: {msg}");
                        failures.push(msg);
                        ok = false;
                    }
                }
            }
            if ok {
                groups.push(ConfigCurves {
                    fingerprint: cfgs[ci].fingerprint(),
                    curves,
                });
                idx.push(ci);
            }
        }
        if groups.is_empty() {
            return Err(HarnessError::ArmFailed(arms[ai].name.clone()));
        }
        let (best, aucs) = auc_select(&sweep_grid, &groups)?;
        best_idx[ai] = idx[best];
        sweep_aucs[ai] = groups.iter().map(|g| g.fingerprint.clone()).zip(aucs).collect();
    }

    // Final runs of each arm's selected configuration on fresh seeds.
    let final_cfgs: Vec<Vec<RunConfig>> = arms
        .iter()
        .enumerate()
        .map(|(ai, a)| vec![arm_configs(spec, a, spec.total_steps).swap_remove(best_idx[ai])])
        .collect();
    let final_seed0 = spec.seed + spec.n_sweep as u64;
    let jobs: Vec<Job> = (0..arms.len())
        .flat_map(|ai| {
            (0..spec.n_final).map(move |s| Job {
                arm: ai,
                cfg: 0,
                seed: final_seed0 + s as u64,
            })
        })
        .collect();
    log::info!("final: {} runs", jobs.len());
    let results = run_jobs(&jobs, &final_cfgs, pool.as_ref());
    let xs = grid(spec.total_steps, GRID_POINTS);
    let mut reports = Vec::with_capacity(arms.len());
    let mut per_arm: Vec<Vec<RunRecord>> = vec![Vec::new(); arms.len()];
    for (j, r) in jobs.iter().zip(results) {
        match r {
            Ok(rec) if !rec.points.is_empty() => per_arm[j.arm].push(rec),
            Ok(_) => failures.push(format!("{} seed {}: no episode finished", arms[j.arm].name, j.seed)),
            Err(e) => {
                let msg = format!("{} seed {}: {e}", arms[j.arm].name, j.seed);
                log::warn!("final run failed: {msg}");
                failures.push(msg);
            }
        }
    }
    for (ai, arm) in arms.iter().enumerate() {
        let finals = std::mem::take(&mut per_arm[ai]);
        if finals.is_empty() {
            return Err(HarnessError::ArmFailed(arm.name.clone()));
        }
        let curves: Vec<Vec<f64>> = finals.iter().filter_map(|r| curve_of(spec, r)).collect();
        let final_returns: Vec<f64> = finals
            .iter()
            .filter_map(|r| final_return(&r.series(spec.metric), r.total_steps, spec.final_fraction))
            .collect();
        let final_ci = confidence_interval(&final_returns, 0.95).ok();
        let area = auc(&xs, &mean_curve(&curves)?);
        reports.push(ArmReport {
            arm: arm.clone(),
            sweep: std::mem::take(&mut sweep_aucs[ai]),
            best: final_cfgs[ai][0].clone(),
            finals,
            curves,
            final_returns,
            final_ci,
            auc: area,
        });
    }

    let mut gaps = Vec::new();
    for r in reports.iter().skip(2) {
        let g = improvability_gap(&xs, &reports[0].curves, &reports[1].curves, &r.curves, spec.seed)?;
        gaps.push((r.arm.name.clone(), g));
    }
    let report = ProtocolReport {
        spec: spec.clone(),
        grid: xs,
        arms: reports,
        gaps,
        failures,
    };
    if let Some(dir) = &opts.out_dir {
        report.write(dir)?;
    }
    Ok(report)
}

impl ProtocolReport {
    pub fn arm(&self, name: &str) -> Option<&ArmReport> {
        self.arms.iter().find(|a| a.arm.name == name)
    }

    pub fn summary_csv(&self) -> String {
        let mut s = String::from("arm,agent,level,fingerprint,seed,final_return,auc\n");
        for a in &self.arms {
            for (i, r) in a.finals.iter().enumerate() {
                let ret = a.final_returns.get(i).copied().unwrap_or(f64::NAN);
                let area = a.curves.get(i).map_or(f64::NAN, |c| auc(&self.grid, c));
                let _ = writeln!(s, "{},{},{},{},{},{},{}", a.arm.name, a.arm.agent, a.arm.level, r.fingerprint, r.seed, ret, area);
            }
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "env={}", self.spec.env);
        for a in &self.arms {
            let _ = writeln!(s, "[arm {}]", a.arm.name);
            let _ = writeln!(s, "agent={}", a.arm.agent);
            let _ = writeln!(s, "level={}", a.arm.level);
            let _ = writeln!(s, "fingerprint={}", a.best.fingerprint());
            let _ = writeln!(s, "lr={}", a.best.train.lr);
            let _ = writeln!(s, "lambda0={}", a.best.train.ppo.lambda0);
            if a.arm.agent == AgentKind::Ld {
                let _ = writeln!(s, "lambda1={}", a.best.train.ppo.lambda1);
                let _ = writeln!(s, "ld_weight={}", a.best.train.ppo.ld_weight);
            }
            let _ = writeln!(s, "auc={}", a.auc);
            if let Some(ci) = a.final_ci {
                let _ = writeln!(s, "final_mean={}", ci.mean);
                let _ = writeln!(s, "final_ci_lo={}", ci.lo);
                let _ = writeln!(s, "final_ci_hi={}", ci.hi);
            } else if let Some(v) = a.final_returns.first() {
                let _ = writeln!(s, "final_mean={v}");
            }
        }
        for (name, g) in &self.gaps {
            let _ = writeln!(s, "[gap {name}]");
            s.push_str(&g.to_text());
        }
        for f in &self.failures {
            let _ = writeln!(s, "failed={f}");
        }
        s
    }

    /// `records/` with one file per final run, `report.txt`, `summary.csv`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let rec_dir = dir.join("records");
        std::fs::create_dir_all(&rec_dir)?;
        for a in &self.arms {
            for r in &a.finals {
                let name = format!("{}-{}-seed{}.txt", a.arm.name, &r.fingerprint[..12], r.seed);
                r.save(&rec_dir.join(name))?;
            }
        }
        std::fs::write(dir.join("report.txt"), self.to_text())?;
        std::fs::write(dir.join("summary.csv"), self.summary_csv())?;
        Ok(())
    }
}
