//! On-policy training loop: collect a rollout from a batch of environments,
//! then run minibatch updates on it.

use pomem_core::rng::tag_id;
use pomem_core::{BatchEnv, DiscountedReturnAccumulator, Environment, ObservabilityLevel, RngStream};

use crate::adam::Adam;
use crate::error::{AgentError, Result};
use crate::model::{ActorCritic, NetConfig, TorsoKind};
use crate::ppo::{ld_update, ppo_update, PpoConfig, UpdateStats};
use crate::rollout::Rollout;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub torso: TorsoKind,
    pub level: ObservabilityLevel,
    pub num_envs: usize,
    pub num_steps: usize,
    pub total_steps: u64,
    pub hidden_size: usize,
    /// Append a one-hot of the previous action to the observation.
    pub action_concat: bool,
    pub lr: f64,
    pub anneal_lr: bool,
    pub seed: u64,
    /// Threads for environment stepping.
    pub workers: usize,
    /// Start both critics from identical weights.
    pub tied_critics: bool,
    pub ppo: PpoConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            torso: TorsoKind::Recurrent,
            level: ObservabilityLevel::Partial,
            num_envs: 4,
            num_steps: 128,
            total_steps: 1_500_000,
            hidden_size: 128,
            action_concat: false,
            lr: 2.5e-4,
            anneal_lr: true,
            seed: 2020,
            workers: 1,
            tied_critics: false,
            ppo: PpoConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn num_updates(&self) -> u64 {
        self.total_steps / (self.num_envs * self.num_steps) as u64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(AgentError::Config(m));
        if self.num_envs == 0 || self.num_steps == 0 {
            return bad("num_envs and num_steps must be positive".into());
        }
        if self.num_updates() == 0 {
            return bad(format!(
                "total_steps {} is smaller than one rollout ({} x {})",
                self.total_steps, self.num_envs, self.num_steps
            ));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return bad(format!("lr must be finite and non-negative, got {}", self.lr));
        }
        let p = &self.ppo;
        for (name, v) in [("lambda0", p.lambda0), ("lambda1", p.lambda1), ("alpha", p.alpha)] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} must be in [0, 1], got {v}"));
            }
        }
        if p.num_minibatches == 0 || p.num_minibatches > self.num_envs {
            return bad(format!(
                "num_minibatches must be in 1..=num_envs ({}), got {}",
                self.num_envs, p.num_minibatches
            ));
        }
        if p.update_epochs == 0 {
            return bad("update_epochs must be positive".into());
        }
        Ok(())
    }
}

/// One finished episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeLog {
    /// Total environment steps taken (over all instances) when it ended.
    pub env_step: u64,
    pub discounted: f64,
    pub undiscounted: f64,
    pub length: u32,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub episodes: Vec<EpisodeLog>,
    pub updates: Vec<UpdateStats>,
    pub model: ActorCritic,
    pub env_steps: u64,
}

fn write_input(obs: &[f32], prev_action: Option<usize>, num_actions: usize, concat: bool, x: &mut [f64]) {
    for (xi, &o) in x.iter_mut().zip(obs) {
        *xi = f64::from(o);
    }
    if concat {
        let tail = &mut x[obs.len()..obs.len() + num_actions];
        tail.fill(0.0);
        if let Some(a) = prev_action {
            tail[a] = 1.0;
        }
    }
}

pub fn train<E: Environment>(env: E, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let n = cfg.num_envs;
    let steps = cfg.num_steps;
    let level = cfg.level;
    let obs_dim = env.obs_dim(level)?;
    let a_dim = env.num_actions();
    let in_dim = obs_dim + if cfg.action_concat { a_dim } else { 0 };
    let gamma = env.gamma();
    let n_critics = if cfg.ppo.double_critic { 2 } else { 1 };

    let mut init_rng = RngStream::new(cfg.seed, tag_id("init"));
    let mut model = ActorCritic::new(
        NetConfig {
            input_dim: in_dim,
            num_actions: a_dim,
            hidden: cfg.hidden_size,
            torso: cfg.torso,
            n_critics,
        },
        &mut init_rng,
    )?;
    if cfg.tied_critics {
        model.tie_critics();
    }
    let mut adam = Adam::new(model.num_params());
    let mut batch = BatchEnv::with_workers(env, level, n, cfg.seed, cfg.workers)?;
    let mut policy_rng = RngStream::new(cfg.seed, tag_id("policy"));
    let mut mb_rng = RngStream::new(cfg.seed, tag_id("minibatch"));

    let s = model.state_size();
    let zeros = vec![0.0; s];
    let mut hidden = vec![0.0; n * s];
    let mut starts = vec![true; n];
    let mut prev_action: Vec<Option<usize>> = vec![None; n];
    let mut disc = vec![DiscountedReturnAccumulator::new(gamma); n];
    let mut undisc = vec![0.0; n];
    let mut ep_len = vec![0u32; n];

    let mut cache = model.new_cache();
    let mut x = vec![0.0; in_dim];
    let mut lp = vec![0.0; a_dim];
    let mut actions = vec![0usize; n];
    let mut ro = Rollout::new(n, steps, in_dim, a_dim, s, n_critics, gamma);
    let num_updates = cfg.num_updates() as usize;
    let mut episodes = Vec::new();
    let mut updates = Vec::with_capacity(num_updates);
    let mut env_steps = 0u64;

    for u in 0..num_updates {
        ro.h0.copy_from_slice(&hidden);
        for t in 0..steps {
            for i in 0..n {
                let idx = ro.idx(i, t);
                let pa = if starts[i] { None } else { prev_action[i] };
                write_input(batch.obs_row(i), pa, a_dim, cfg.action_concat, &mut x);
                let h_prev = if starts[i] { &zeros[..] } else { &hidden[i * s..(i + 1) * s] };
                let mask = batch.mask_row(i);
                let a = model.act(&x, h_prev, mask, &mut policy_rng, &mut cache, &mut lp)?;
                hidden[i * s..(i + 1) * s].copy_from_slice(&cache.feat[..s]);
                ro.inputs[idx * in_dim..(idx + 1) * in_dim].copy_from_slice(&x);
                ro.starts[idx] = starts[i];
                ro.actions[idx] = a;
                ro.masks[idx * a_dim..(idx + 1) * a_dim].copy_from_slice(mask);
                ro.logp[idx] = lp[a];
                for c in 0..n_critics {
                    ro.values[c][idx] = cache.values[c];
                }
                if !cache.values.iter().all(|v| v.is_finite()) {
                    return Err(AgentError::NonFinite { what: "value", update: u });
                }
                actions[i] = a;
            }
            batch.step(&actions)?;
            env_steps += n as u64;
            for i in 0..n {
                let idx = ro.idx(i, t);
                let (r, term, trunc) = {
                    let v = batch.view();
                    (v.rewards[i], v.terminated[i], v.truncated[i])
                };
                ro.rewards[idx] = r;
                ro.terminated[idx] = term;
                ro.truncated[idx] = trunc;
                disc[i].push(r);
                undisc[i] += r;
                ep_len[i] += 1;
                prev_action[i] = Some(actions[i]);
                if trunc {
                    write_input(batch.final_obs_row(i), prev_action[i], a_dim, cfg.action_concat, &mut x);
                    model.forward_step(&x, &hidden[i * s..(i + 1) * s], &mut cache);
                    for c in 0..n_critics {
                        ro.truncation_values[c][idx] = cache.values[c];
                    }
                }
                let done = term || trunc;
                if done {
                    episodes.push(EpisodeLog {
                        env_step: env_steps,
                        discounted: disc[i].total(),
                        undiscounted: undisc[i],
                        length: ep_len[i],
                    });
                    disc[i].reset();
                    undisc[i] = 0.0;
                    ep_len[i] = 0;
                }
                starts[i] = done;
            }
        }
        for i in 0..n {
            let pa = if starts[i] { None } else { prev_action[i] };
            write_input(batch.obs_row(i), pa, a_dim, cfg.action_concat, &mut x);
            let h_prev = if starts[i] { &zeros[..] } else { &hidden[i * s..(i + 1) * s] };
            model.forward_step(&x, h_prev, &mut cache);
            for c in 0..n_critics {
                ro.bootstrap[c][i] = cache.values[c];
            }
        }

        let lr = if cfg.anneal_lr {
            cfg.lr * (1.0 - u as f64 / num_updates as f64)
        } else {
            cfg.lr
        };
        let stats = if cfg.ppo.double_critic {
            ld_update(&mut model, &mut adam, &ro, &cfg.ppo, lr, &mut mb_rng, u)?
        } else {
            ppo_update(&mut model, &mut adam, &ro, &cfg.ppo, lr, &mut mb_rng, u)?
        };
        log::debug!(
            "update {u}/{num_updates}: loss {:.4} value {:.4} entropy {:.4} kl {:.5}",
            stats.loss.total,
            stats.loss.value,
            stats.loss.entropy,
            stats.loss.approx_kl
        );
        updates.push(stats);
    }

    Ok(TrainOutcome {
        episodes,
        updates,
        model,
        env_steps,
    })
}
