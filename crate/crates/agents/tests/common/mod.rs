#![allow(dead_code)]

use pomem_agents::dist::masked_log_softmax;
use pomem_agents::rollout::Rollout;
use pomem_agents::{ActorCritic, NetConfig, TorsoKind};
use pomem_core::RngStream;

pub fn net(torso: TorsoKind, n_critics: usize, seed: u64) -> ActorCritic {
    let cfg = NetConfig {
        input_dim: 5,
        num_actions: 4,
        hidden: 6,
        torso,
        n_critics,
    };
    ActorCritic::new(cfg, &mut RngStream::new(seed, 0)).unwrap()
}

/// Random rollout consistent with `model`. Behaviour log-probs are the
/// model's own, shifted so ratios sit either well inside or well outside the
/// clip band.
pub fn synthetic_rollout(model: &ActorCritic, num_envs: usize, num_steps: usize, seed: u64) -> Rollout {
    let cfg = *model.config();
    let mut rng = RngStream::new(seed, 1);
    let s = model.state_size();
    let mut ro = Rollout::new(num_envs, num_steps, cfg.input_dim, cfg.num_actions, s, cfg.n_critics, 0.9);
    for v in ro.inputs.iter_mut() {
        *v = rng.normal();
    }
    for v in ro.h0.iter_mut() {
        *v = rng.uniform() * 2.0 - 1.0;
    }
    for e in 0..num_envs {
        for t in 0..num_steps {
            let i = ro.idx(e, t);
            ro.starts[i] = t > 0 && rng.bernoulli(0.2);
            let m = &mut ro.masks[i * cfg.num_actions..(i + 1) * cfg.num_actions];
            for b in m.iter_mut() {
                *b = rng.bernoulli(0.7);
            }
            let a = rng.below(cfg.num_actions);
            m[a] = true;
            ro.actions[i] = a;
            ro.rewards[i] = rng.normal();
            ro.terminated[i] = rng.bernoulli(0.1);
            ro.truncated[i] = !ro.terminated[i] && rng.bernoulli(0.05);
            for c in 0..cfg.n_critics {
                ro.values[c][i] = rng.normal();
                ro.truncation_values[c][i] = rng.normal();
            }
        }
        for c in 0..cfg.n_critics {
            ro.bootstrap[c][e] = rng.normal();
        }
    }
    let mut lp = vec![0.0; cfg.num_actions];
    for e in 0..num_envs {
        let r = ro.seg(e);
        let caches = model.forward_seq(
            &ro.inputs[r.start * cfg.input_dim..r.end * cfg.input_dim],
            &ro.starts[r.clone()],
            &ro.h0[e * s..(e + 1) * s],
        );
        for (t, c) in caches.iter().enumerate() {
            let i = r.start + t;
            masked_log_softmax(&c.logits, &ro.masks[i * cfg.num_actions..(i + 1) * cfg.num_actions], &mut lp);
            let shift = if rng.bernoulli(0.5) {
                rng.uniform() * 0.1 - 0.05
            } else if rng.bernoulli(0.5) {
                0.4 + rng.uniform() * 0.3
            } else {
                -0.4 - rng.uniform() * 0.3
            };
            ro.logp[i] = lp[ro.actions[i]] + shift;
        }
    }
    ro
}

