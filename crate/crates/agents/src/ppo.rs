//! Clipped-surrogate policy optimisation, with an optional second critic
//! trained at a different GAE lambda and a penalty on their disagreement.

use pomem_core::RngStream;

use crate::adam::{clip_global_norm, Adam};
use crate::dist::{entropy, masked_log_softmax};
use crate::error::{AgentError, Result};
use crate::gae::{gae, normalize, Segment};
use crate::model::ActorCritic;
use crate::rollout::Rollout;

#[derive(Debug, Clone, PartialEq)]
pub struct PpoConfig {
    pub clip_eps: f64,
    pub vf_coeff: f64,
    pub entropy_coeff: f64,
    pub max_grad_norm: f64,
    pub lambda0: f64,
    pub lambda1: f64,
    /// Weight of critic 0's advantage in the policy advantage.
    pub alpha: f64,
    pub ld_weight: f64,
    pub num_minibatches: usize,
    pub update_epochs: usize,
    pub double_critic: bool,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            clip_eps: 0.2,
            vf_coeff: 0.5,
            entropy_coeff: 0.01,
            max_grad_norm: 0.5,
            lambda0: 0.95,
            lambda1: 0.5,
            alpha: 1.0,
            ld_weight: 0.0,
            num_minibatches: 4,
            update_epochs: 4,
            double_critic: false,
        }
    }
}

/// Per-step advantages and value targets for a whole rollout.
#[derive(Debug, Clone)]
pub struct Advantages {
    /// Advantage the policy is trained on, before normalisation.
    pub policy: Vec<f64>,
    /// `[critic][env][t]`
    pub per_critic: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
}

pub fn compute_advantages(ro: &Rollout, cfg: &PpoConfig) -> Advantages {
    let k = ro.n_critics();
    let lambdas = [cfg.lambda0, cfg.lambda1];
    let n = ro.num_envs * ro.num_steps;
    let mut per_critic = vec![vec![0.0; n]; k];
    let mut targets = vec![vec![0.0; n]; k];
    for c in 0..k {
        for e in 0..ro.num_envs {
            let r = ro.seg(e);
            let seg = Segment {
                rewards: &ro.rewards[r.clone()],
                values: &ro.values[c][r.clone()],
                terminated: &ro.terminated[r.clone()],
                truncated: &ro.truncated[r.clone()],
                truncation_values: &ro.truncation_values[c][r.clone()],
                bootstrap_value: ro.bootstrap[c][e],
            };
            let (a, t) = gae(&seg, ro.gamma, lambdas[c]);
            per_critic[c][r.clone()].copy_from_slice(&a);
            targets[c][r].copy_from_slice(&t);
        }
    }
    let policy = if k == 2 {
        per_critic[0]
            .iter()
            .zip(&per_critic[1])
            .map(|(a0, a1)| cfg.alpha * a0 + (1.0 - cfg.alpha) * a1)
            .collect()
    } else {
        per_critic[0].clone()
    };
    Advantages {
        policy,
        per_critic,
        targets,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossStats {
    pub total: f64,
    pub policy: f64,
    pub value: f64,
    pub entropy: f64,
    /// Mean squared disagreement of the two critics.
    pub aux: f64,
    pub approx_kl: f64,
    pub clip_frac: f64,
}

impl LossStats {
    fn add_scaled(&mut self, o: &LossStats, s: f64) {
        self.total += s * o.total;
        self.policy += s * o.policy;
        self.value += s * o.value;
        self.entropy += s * o.entropy;
        self.aux += s * o.aux;
        self.approx_kl += s * o.approx_kl;
        self.clip_frac += s * o.clip_frac;
    }
}

/// Loss on the minibatch made of the listed environments' segments. With
/// `grad`, the gradient of `total` is added into it.
pub fn minibatch_loss(
    model: &ActorCritic,
    ro: &Rollout,
    adv: &Advantages,
    envs: &[usize],
    cfg: &PpoConfig,
    mut grad: Option<&mut [f64]>,
) -> Result<LossStats> {
    let t_len = ro.num_steps;
    let a_dim = ro.num_actions;
    let d = ro.input_dim;
    let s = ro.state_size;
    let k = ro.n_critics();
    if model.config().n_critics != k {
        return Err(AgentError::Contract("rollout and model disagree on critic count".into()));
    }
    let m = (envs.len() * t_len) as f64;
    let scale = 1.0 / m;

    let mut padv: Vec<f64> = envs.iter().flat_map(|&e| adv.policy[ro.seg(e)].iter().copied()).collect();
    normalize(&mut padv);

    let mut st = LossStats::default();
    let mut lp = vec![0.0; a_dim];
    let mut dlogits = vec![0.0; t_len * a_dim];
    let mut dvalues = vec![vec![0.0; t_len]; k];
    for (j, &e) in envs.iter().enumerate() {
        let base = e * t_len;
        let caches = model.forward_seq(
            &ro.inputs[base * d..(base + t_len) * d],
            &ro.starts[base..base + t_len],
            &ro.h0[e * s..(e + 1) * s],
        );
        for (t, c) in caches.iter().enumerate() {
            let i = base + t;
            let mask = &ro.masks[i * a_dim..(i + 1) * a_dim];
            if !masked_log_softmax(&c.logits, mask, &mut lp) {
                return Err(AgentError::Contract(format!("no legal action at env {e} step {t}")));
            }
            let a = ro.actions[i];
            let log_ratio = lp[a] - ro.logp[i];
            let ratio = log_ratio.exp();
            let adv_i = padv[j * t_len + t];
            let unclipped = ratio * adv_i;
            let clipped = ratio.clamp(1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps) * adv_i;
            let pg = -unclipped.min(clipped);
            let d_logp = if unclipped <= clipped { -adv_i * ratio } else { 0.0 };
            let h = entropy(&lp);

            let dl = &mut dlogits[t * a_dim..(t + 1) * a_dim];
            for q in 0..a_dim {
                dl[q] = if mask[q] {
                    let p = lp[q].exp();
                    let ind = if q == a { 1.0 } else { 0.0 };
                    scale * (d_logp * (ind - p) + cfg.entropy_coeff * p * (lp[q] + h))
                } else {
                    0.0
                };
            }

            let mut vloss = 0.0;
            for (ci, dv) in dvalues.iter_mut().enumerate() {
                let err = c.values[ci] - adv.targets[ci][i];
                vloss += 0.5 * err * err;
                dv[t] = scale * cfg.vf_coeff * err;
            }
            let mut aux = 0.0;
            if k == 2 {
                let diff = c.values[0] - c.values[1];
                aux = diff * diff;
                let g = scale * 2.0 * cfg.ld_weight * diff;
                dvalues[0][t] += g;
                dvalues[1][t] -= g;
            }

            st.policy += pg;
            st.value += vloss;
            st.entropy += h;
            st.aux += aux;
            st.approx_kl += (ratio - 1.0) - log_ratio;
            if (ratio - 1.0).abs() > cfg.clip_eps {
                st.clip_frac += 1.0;
            }
        }
        if let Some(g) = grad.as_deref_mut() {
            model.backward_seq(&caches, &ro.starts[base..base + t_len], &dlogits, &dvalues, g);
        }
    }
    st.policy *= scale;
    st.value *= scale;
    st.entropy *= scale;
    st.aux *= scale;
    st.approx_kl *= scale;
    st.clip_frac *= scale;
    st.total = st.policy + cfg.vf_coeff * st.value - cfg.entropy_coeff * st.entropy + cfg.ld_weight * st.aux;
    Ok(st)
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UpdateStats {
    /// Mean over minibatches.
    pub loss: LossStats,
    /// Mean gradient norm before clipping.
    pub grad_norm: f64,
    pub lr: f64,
}

/// Split `0..n` after a shuffle into `parts` near-equal groups.
pub fn minibatches(n: usize, parts: usize, rng: &mut RngStream) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);
    let (base, rem) = (n / parts, n % parts);
    let mut out = Vec::with_capacity(parts);
    let mut start = 0;
    for p in 0..parts {
        let len = base + usize::from(p < rem);
        out.push(order[start..start + len].to_vec());
        start += len;
    }
    out
}

/// Several epochs of minibatch gradient steps on one rollout.
pub fn ppo_update(
    model: &mut ActorCritic,
    adam: &mut Adam,
    ro: &Rollout,
    cfg: &PpoConfig,
    lr: f64,
    rng: &mut RngStream,
    update: usize,
) -> Result<UpdateStats> {
    let k = model.config().n_critics;
    if cfg.double_critic != (k == 2) {
        return Err(AgentError::Contract(format!(
            "double_critic={} but the model has {k} critic(s)",
            cfg.double_critic
        )));
    }
    if cfg.num_minibatches == 0 || cfg.num_minibatches > ro.num_envs {
        return Err(AgentError::Config(format!(
            "num_minibatches must be in 1..={} (one environment per minibatch at least), got {}",
            ro.num_envs, cfg.num_minibatches
        )));
    }
    let adv = compute_advantages(ro, cfg);
    if adv.policy.iter().any(|a| !a.is_finite()) {
        return Err(AgentError::NonFinite { what: "advantage", update });
    }
    let mut stats = UpdateStats {
        lr,
        ..Default::default()
    };
    let mut grad = vec![0.0; model.num_params()];
    let n_steps = (cfg.update_epochs * cfg.num_minibatches) as f64;
    for _ in 0..cfg.update_epochs {
        for mb in minibatches(ro.num_envs, cfg.num_minibatches, rng) {
            grad.fill(0.0);
            let l = minibatch_loss(model, ro, &adv, &mb, cfg, Some(&mut grad))?;
            if !l.total.is_finite() {
                return Err(AgentError::NonFinite { what: "loss", update });
            }
            let norm = clip_global_norm(&mut grad, cfg.max_grad_norm);
            if !norm.is_finite() {
                return Err(AgentError::NonFinite { what: "gradient", update });
            }
            adam.step(&mut model.params, &grad, lr);
            stats.loss.add_scaled(&l, 1.0 / n_steps);
            stats.grad_norm += norm / n_steps;
        }
    }
    Ok(stats)
}

/// [`ppo_update`] for the two-critic variant; refuses single-critic setups.
pub fn ld_update(
    model: &mut ActorCritic,
    adam: &mut Adam,
    ro: &Rollout,
    cfg: &PpoConfig,
    lr: f64,
    rng: &mut RngStream,
    update: usize,
) -> Result<UpdateStats> {
    if !cfg.double_critic {
        return Err(AgentError::Contract("lambda-discrepancy update needs double_critic".into()));
    }
    ppo_update(model, adam, ro, cfg, lr, rng, update)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minibatch_partition() {
        let mut rng = RngStream::new(0, 0);
        let mbs = minibatches(10, 4, &mut rng);
        assert_eq!(mbs.iter().map(Vec::len).collect::<Vec<_>>(), vec![3, 3, 2, 2]);
        let mut all: Vec<usize> = mbs.concat();
        all.sort();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
    }
}
