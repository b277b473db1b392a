//! Actor-critic network: a memoryless or recurrent torso, one actor head and
//! one or two critic heads, all stored in one flat `f64` parameter vector.

use pomem_core::RngStream;

use crate::dist::{masked_log_softmax, sample};
use crate::error::{AgentError, Result};
use crate::nn::{Dense, Gru, GruCache};

const MLP_DEPTH: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TorsoKind {
    /// Four dense layers with ReLU.
    Memoryless,
    /// Dense + ReLU embedding followed by a GRU cell.
    Recurrent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetConfig {
    pub input_dim: usize,
    pub num_actions: usize,
    pub hidden: usize,
    pub torso: TorsoKind,
    pub n_critics: usize,
}

/// Parameter layout plus the parameters themselves.
#[derive(Debug, Clone)]
pub struct ActorCritic {
    cfg: NetConfig,
    torso: Vec<Dense>,
    gru: Option<Gru>,
    actor: [Dense; 2],
    critics: Vec<[Dense; 2]>,
    pub params: Vec<f64>,
}

/// Outcome of [`ActorCritic::select_action`].
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub action: usize,
    pub logp: f64,
    pub values: Vec<f64>,
    /// Recurrent state after this step; empty for the memoryless torso.
    pub h: Vec<f64>,
}

/// Everything one forward step produces, kept for the backward pass.
#[derive(Debug, Clone)]
pub struct StepCache {
    pub x: Vec<f64>,
    torso: Vec<Vec<f64>>,
    pub h_prev: Vec<f64>,
    gru: GruCache,
    /// Torso output; for the recurrent torso this is the new hidden state.
    pub feat: Vec<f64>,
    actor_hid: Vec<f64>,
    pub logits: Vec<f64>,
    critic_hid: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    scratch: Vec<f64>,
}

impl StepCache {
    /// Which ReLU units were active. Finite-difference checks use this to
    /// spot perturbations that cross a kink.
    pub fn relu_pattern(&self) -> Vec<bool> {
        self.torso
            .iter()
            .chain(std::iter::once(&self.actor_hid))
            .chain(self.critic_hid.iter())
            .flat_map(|v| v.iter().map(|&x| x > 0.0))
            .collect()
    }
}

impl ActorCritic {
    /// Build and initialise. Parameters are allocated and drawn in the order
    /// torso, actor, critic 0, critic 1.
    pub fn new(cfg: NetConfig, rng: &mut RngStream) -> Result<Self> {
        if cfg.input_dim == 0 || cfg.num_actions == 0 || cfg.hidden == 0 {
            return Err(AgentError::Config("network dimensions must be positive".into()));
        }
        if !(1..=2).contains(&cfg.n_critics) {
            return Err(AgentError::Config(format!("n_critics must be 1 or 2, got {}", cfg.n_critics)));
        }
        let h = cfg.hidden;
        let mut off = 0;
        let (torso, gru) = match cfg.torso {
            TorsoKind::Memoryless => {
                let mut layers = vec![Dense::alloc(&mut off, cfg.input_dim, h)];
                for _ in 1..MLP_DEPTH {
                    layers.push(Dense::alloc(&mut off, h, h));
                }
                (layers, None)
            }
            TorsoKind::Recurrent => {
                let emb = Dense::alloc(&mut off, cfg.input_dim, h);
                (vec![emb], Some(Gru::alloc(&mut off, h, h)))
            }
        };
        let actor = [Dense::alloc(&mut off, h, h), Dense::alloc(&mut off, h, cfg.num_actions)];
        let critics: Vec<[Dense; 2]> = (0..cfg.n_critics)
            .map(|_| [Dense::alloc(&mut off, h, h), Dense::alloc(&mut off, h, 1)])
            .collect();
        let mut model = Self {
            cfg,
            torso,
            gru,
            actor,
            critics,
            params: vec![0.0; off],
        };
        model.init(rng);
        Ok(model)
    }

    fn init(&mut self, rng: &mut RngStream) {
        let p = &mut self.params;
        let relu_gain = 2f64.sqrt();
        for layer in &self.torso {
            layer.init(p, relu_gain, rng);
        }
        if let Some(g) = &self.gru {
            g.init(p, rng);
        }
        self.actor[0].init(p, relu_gain, rng);
        self.actor[1].init(p, 0.01, rng);
        for c in &self.critics {
            c[0].init(p, relu_gain, rng);
            c[1].init(p, 1.0, rng);
        }
    }

    /// Copy critic 0's parameters into critic 1.
    pub fn tie_critics(&mut self) {
        if self.critics.len() == 2 {
            let (a, b) = (self.critic_range(0), self.critic_range(1));
            let src = self.params[a].to_vec();
            self.params[b].copy_from_slice(&src);
        }
    }

    pub fn config(&self) -> &NetConfig {
        &self.cfg
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn is_recurrent(&self) -> bool {
        self.gru.is_some()
    }

    /// Recurrent state width; zero for the memoryless torso.
    pub fn state_size(&self) -> usize {
        if self.gru.is_some() {
            self.cfg.hidden
        } else {
            0
        }
    }

    /// Parameter index range of the actor head.
    pub fn actor_range(&self) -> std::ops::Range<usize> {
        self.actor[0].w..self.actor[1].b + self.actor[1].dout
    }

    /// Parameter index range of critic head `k`.
    pub fn critic_range(&self, k: usize) -> std::ops::Range<usize> {
        let c = &self.critics[k];
        c[0].w..c[1].b + 1
    }

    pub fn new_cache(&self) -> StepCache {
        let h = self.cfg.hidden;
        StepCache {
            x: vec![0.0; self.cfg.input_dim],
            torso: self.torso.iter().map(|_| vec![0.0; h]).collect(),
            h_prev: vec![0.0; self.state_size()],
            gru: GruCache::new(if self.gru.is_some() { h } else { 0 }),
            feat: vec![0.0; h],
            actor_hid: vec![0.0; h],
            logits: vec![0.0; self.cfg.num_actions],
            critic_hid: self.critics.iter().map(|_| vec![0.0; h]).collect(),
            values: vec![0.0; self.critics.len()],
            scratch: vec![0.0; 6 * h],
        }
    }

    /// One forward step. `h_prev` is ignored by the memoryless torso.
    pub fn forward_step(&self, x: &[f64], h_prev: &[f64], c: &mut StepCache) {
        let p = &self.params;
        c.x.copy_from_slice(x);
        let mut input: &[f64] = &c.x;
        for (layer, out) in self.torso.iter().zip(c.torso.iter_mut()) {
            layer.forward(p, input, out);
            relu(out);
            input = out;
        }
        match &self.gru {
            Some(g) => {
                c.h_prev.copy_from_slice(h_prev);
                g.forward(p, &c.torso[0], &c.h_prev, &mut c.feat, &mut c.gru, &mut c.scratch);
            }
            None => c.feat.copy_from_slice(&c.torso[MLP_DEPTH - 1]),
        }
        self.actor[0].forward(p, &c.feat, &mut c.actor_hid);
        relu(&mut c.actor_hid);
        self.actor[1].forward(p, &c.actor_hid, &mut c.logits);
        for (k, head) in self.critics.iter().enumerate() {
            head[0].forward(p, &c.feat, &mut c.critic_hid[k]);
            relu(&mut c.critic_hid[k]);
            let mut v = [0.0];
            head[1].forward(p, &c.critic_hid[k], &mut v);
            c.values[k] = v[0];
        }
    }

    /// Sample from the masked policy. Uses `cache` as workspace; `logp` gets
    /// the full masked log-probability vector.
    pub fn act(&self, x: &[f64], h_prev: &[f64], mask: &[bool], rng: &mut RngStream, cache: &mut StepCache, logp: &mut [f64]) -> Result<usize> {
        self.forward_step(x, h_prev, cache);
        if !masked_log_softmax(&cache.logits, mask, logp) {
            return Err(AgentError::Contract("no legal action in mask".into()));
        }
        Ok(sample(logp, rng))
    }

    /// Allocating convenience wrapper around [`Self::act`].
    pub fn select_action(&self, x: &[f64], h_prev: &[f64], mask: &[bool], rng: &mut RngStream) -> Result<Selection> {
        let mut cache = self.new_cache();
        let mut logp = vec![0.0; self.cfg.num_actions];
        let action = self.act(x, h_prev, mask, rng, &mut cache, &mut logp)?;
        Ok(Selection {
            action,
            logp: logp[action],
            values: cache.values.clone(),
            h: cache.feat[..self.state_size()].to_vec(),
        })
    }

    /// Forward over a sequence. `inputs` is `T × input_dim`; the recurrent
    /// state is zeroed before every step flagged in `starts`.
    pub fn forward_seq(&self, inputs: &[f64], starts: &[bool], h0: &[f64]) -> Vec<StepCache> {
        let d = self.cfg.input_dim;
        let zero = vec![0.0; self.state_size()];
        let mut out: Vec<StepCache> = Vec::with_capacity(starts.len());
        for (t, &start) in starts.iter().enumerate() {
            let mut c = self.new_cache();
            let h_prev: &[f64] = if start {
                &zero
            } else if t == 0 {
                h0
            } else {
                &out[t - 1].feat
            };
            self.forward_step(&inputs[t * d..(t + 1) * d], h_prev, &mut c);
            out.push(c);
        }
        out
    }

    /// Backpropagate through a sequence produced by [`Self::forward_seq`].
    /// `dlogits` is `T × num_actions`, `dvalues[k]` is `T`. Gradients are
    /// added into `grad`. No gradient crosses an episode start.
    pub fn backward_seq(&self, caches: &[StepCache], starts: &[bool], dlogits: &[f64], dvalues: &[Vec<f64>], grad: &mut [f64]) {
        let p = &self.params;
        let h = self.cfg.hidden;
        let a = self.cfg.num_actions;
        let mut dfeat = vec![0.0; h];
        let mut dtmp = vec![0.0; h];
        let mut dhid = vec![0.0; h];
        let mut carry = vec![0.0; h];
        let mut dx_emb = vec![0.0; h];
        let mut dh_prev = vec![0.0; h];
        let mut scratch = vec![0.0; 6 * h];
        for t in (0..caches.len()).rev() {
            let c = &caches[t];
            // Heads.
            self.actor[1].backward(p, grad, &c.actor_hid, &dlogits[t * a..(t + 1) * a], Some(&mut dhid));
            relu_back(&c.actor_hid, &mut dhid);
            self.actor[0].backward(p, grad, &c.feat, &dhid, Some(&mut dfeat));
            for (k, head) in self.critics.iter().enumerate() {
                head[1].backward(p, grad, &c.critic_hid[k], &[dvalues[k][t]], Some(&mut dhid));
                relu_back(&c.critic_hid[k], &mut dhid);
                head[0].backward(p, grad, &c.feat, &dhid, Some(&mut dtmp));
                for (f, d) in dfeat.iter_mut().zip(&dtmp) {
                    *f += d;
                }
            }
            // Torso.
            match &self.gru {
                Some(g) => {
                    for (f, cy) in dfeat.iter_mut().zip(&carry) {
                        *f += cy;
                    }
                    g.backward(p, grad, &c.torso[0], &c.h_prev, &c.gru, &dfeat, &mut dx_emb, &mut dh_prev, &mut scratch);
                    if starts[t] {
                        carry.fill(0.0);
                    } else {
                        carry.copy_from_slice(&dh_prev);
                    }
                    relu_back(&c.torso[0], &mut dx_emb);
                    self.torso[0].backward(p, grad, &c.x, &dx_emb, None);
                }
                None => {
                    let mut dy = dfeat.clone();
                    for l in (0..MLP_DEPTH).rev() {
                        relu_back(&c.torso[l], &mut dy);
                        if l == 0 {
                            self.torso[0].backward(p, grad, &c.x, &dy, None);
                        } else {
                            self.torso[l].backward(p, grad, &c.torso[l - 1], &dy, Some(&mut dtmp));
                            dy.copy_from_slice(&dtmp);
                        }
                    }
                }
            }
        }
    }
}

fn relu(v: &mut [f64]) {
    for x in v.iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
}

/// Zero `dy` wherever the ReLU output was not positive.
fn relu_back(out: &[f64], dy: &mut [f64]) {
    for (d, &o) in dy.iter_mut().zip(out) {
        if o <= 0.0 {
            *d = 0.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(torso: TorsoKind, n_critics: usize) -> NetConfig {
        NetConfig {
            input_dim: 3,
            num_actions: 4,
            hidden: 8,
            torso,
            n_critics,
        }
    }

    #[test]
    fn layout_sizes() {
        let m = ActorCritic::new(cfg(TorsoKind::Memoryless, 1), &mut RngStream::new(0, 0)).unwrap();
        let h = 8;
        let torso = (3 * h + h) + 3 * (h * h + h);
        let actor = (h * h + h) + (h * 4 + 4);
        let critic = (h * h + h) + (h + 1);
        assert_eq!(m.num_params(), torso + actor + critic);
        let r = ActorCritic::new(cfg(TorsoKind::Recurrent, 2), &mut RngStream::new(0, 0)).unwrap();
        let gru = 2 * (3 * h * h + 3 * h);
        assert_eq!(r.num_params(), (3 * h + h) + gru + actor + 2 * critic);
        assert_eq!(r.critic_range(1).end, r.num_params());
    }

    #[test]
    fn shared_prefix_is_identical_across_critic_counts() {
        let a = ActorCritic::new(cfg(TorsoKind::Recurrent, 1), &mut RngStream::new(4, 0)).unwrap();
        let b = ActorCritic::new(cfg(TorsoKind::Recurrent, 2), &mut RngStream::new(4, 0)).unwrap();
        assert_eq!(a.params[..], b.params[..a.num_params()]);
    }

    #[test]
    fn tie_critics_copies() {
        let mut m = ActorCritic::new(cfg(TorsoKind::Memoryless, 2), &mut RngStream::new(1, 0)).unwrap();
        m.tie_critics();
        let mut c = m.new_cache();
        m.forward_step(&[1.0, 0.5, -0.3], &[], &mut c);
        assert_eq!(c.values[0], c.values[1]);
    }

    #[test]
    fn rejects_bad_config() {
        let mut rng = RngStream::new(0, 0);
        assert!(ActorCritic::new(cfg(TorsoKind::Memoryless, 3), &mut rng).is_err());
        let mut bad = cfg(TorsoKind::Memoryless, 1);
        bad.hidden = 0;
        assert!(ActorCritic::new(bad, &mut rng).is_err());
    }

    #[test]
    fn select_action_respects_mask() {
        let m = ActorCritic::new(cfg(TorsoKind::Recurrent, 1), &mut RngStream::new(3, 0)).unwrap();
        let mut rng = RngStream::new(0, 0);
        let s = m.select_action(&[1.0, 0.0, 0.0], &[0.0; 8], &[false, false, true, false], &mut rng).unwrap();
        assert_eq!((s.action, s.logp), (2, 0.0));
        assert_eq!(s.h.len(), 8);
        assert!(matches!(
            m.select_action(&[1.0, 0.0, 0.0], &[0.0; 8], &[false; 4], &mut rng),
            Err(AgentError::Contract(_))
        ));
    }

    #[test]
    fn start_flag_zeroes_state() {
        let m = ActorCritic::new(cfg(TorsoKind::Recurrent, 1), &mut RngStream::new(2, 0)).unwrap();
        let x = [0.2, 0.1, -0.7, 1.0, 0.0, 0.3];
        let h0 = vec![0.9; 8];
        let a = m.forward_seq(&x, &[false, true], &h0);
        let b = m.forward_seq(&x[3..], &[true], &[0.0; 8]);
        assert_eq!(a[1].logits, b[0].logits);
        assert_ne!(a[0].h_prev, vec![0.0; 8]);
    }
}
