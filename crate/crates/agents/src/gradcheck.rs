//! Central finite-difference check of the analytic loss gradient.

use crate::error::Result;
use crate::model::ActorCritic;
use crate::ppo::{compute_advantages, minibatch_loss, PpoConfig};
use crate::rollout::Rollout;

/// Below this magnitude a gradient component is compared absolutely.
pub const REL_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheck {
    /// Largest `|analytic - numeric| / max(|analytic|, |numeric|, REL_FLOOR)`.
    pub max_rel_err: f64,
    pub checked: usize,
    /// Components whose perturbation flipped a ReLU.
    pub skipped: usize,
}

fn relu_pattern(model: &ActorCritic, ro: &Rollout) -> Vec<bool> {
    let (d, s) = (ro.input_dim, ro.state_size);
    let mut out = Vec::new();
    for e in 0..ro.num_envs {
        let r = ro.seg(e);
        for c in model.forward_seq(&ro.inputs[r.start * d..r.end * d], &ro.starts[r.clone()], &ro.h0[e * s..(e + 1) * s]) {
            out.extend(c.relu_pattern());
        }
    }
    out
}

/// Compare the gradient of the full-rollout loss with central differences of
/// step `eps` for every parameter.
pub fn check_gradients(model: &ActorCritic, ro: &Rollout, cfg: &PpoConfig, eps: f64) -> Result<GradCheck> {
    let adv = compute_advantages(ro, cfg);
    let envs: Vec<usize> = (0..ro.num_envs).collect();
    let mut grad = vec![0.0; model.num_params()];
    minibatch_loss(model, ro, &adv, &envs, cfg, Some(&mut grad))?;
    let base = relu_pattern(model, ro);
    let mut probe = model.clone();
    let mut out = GradCheck {
        max_rel_err: 0.0,
        checked: 0,
        skipped: 0,
    };
    for i in 0..model.num_params() {
        let p0 = model.params[i];
        probe.params[i] = p0 + eps;
        let plus = minibatch_loss(&probe, ro, &adv, &envs, cfg, None)?.total;
        let kink = relu_pattern(&probe, ro) != base;
        probe.params[i] = p0 - eps;
        let minus = minibatch_loss(&probe, ro, &adv, &envs, cfg, None)?.total;
        let kink = kink || relu_pattern(&probe, ro) != base;
        probe.params[i] = p0;
        if kink {
            out.skipped += 1;
            continue;
        }
        let fd = (plus - minus) / (2.0 * eps);
        let rel = (grad[i] - fd).abs() / grad[i].abs().max(fd.abs()).max(REL_FLOOR);
        out.max_rel_err = out.max_rel_err.max(rel);
        out.checked += 1;
    }
    Ok(out)
}
