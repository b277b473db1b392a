//! A fully specified training run minus its seed, and its fingerprint.

use std::fmt;
use std::str::FromStr;

use pomem_agents::{TorsoKind, TrainConfig};
use sha2::{Digest, Sha256};

use crate::error::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AgentKind {
    Memoryless,
    Rnn,
    /// Recurrent agent with two critics and the discrepancy penalty.
    Ld,
}

impl AgentKind {
    pub const ALL: [AgentKind; 3] = [AgentKind::Memoryless, AgentKind::Rnn, AgentKind::Ld];

    pub fn as_str(self) -> &'static str {
        match self {
            AgentKind::Memoryless => "memoryless",
            AgentKind::Rnn => "rnn",
            AgentKind::Ld => "ld",
        }
    }

    pub fn torso(self) -> TorsoKind {
        match self {
            AgentKind::Memoryless => TorsoKind::Memoryless,
            AgentKind::Rnn | AgentKind::Ld => TorsoKind::Recurrent,
        }
    }

    pub fn double_critic(self) -> bool {
        self == AgentKind::Ld
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AgentKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown agent `{s}` (expected memoryless, rnn or ld)")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub env: String,
    pub agent: AgentKind,
    pub train: TrainConfig,
}

impl RunConfig {
    /// Torso and critic count are taken from `agent`.
    pub fn new(env: impl Into<String>, agent: AgentKind, mut train: TrainConfig) -> Self {
        train.torso = agent.torso();
        train.ppo.double_critic = agent.double_critic();
        Self {
            env: env.into(),
            agent,
            train,
        }
    }

    /// Canonical `key=value` pairs, sorted by key. Seed and worker count are
    /// left out: they do not change what is being trained.
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let t = &self.train;
        let p = &t.ppo;
        let mut v = vec![
            ("env", self.env.clone()),
            ("agent", self.agent.to_string()),
            ("level", t.level.to_string()),
            ("num_envs", t.num_envs.to_string()),
            ("num_steps", t.num_steps.to_string()),
            ("total_steps", t.total_steps.to_string()),
            ("hidden_size", t.hidden_size.to_string()),
            ("action_concat", t.action_concat.to_string()),
            ("lr", t.lr.to_string()),
            ("anneal_lr", t.anneal_lr.to_string()),
            ("tied_critics", t.tied_critics.to_string()),
            ("clip_eps", p.clip_eps.to_string()),
            ("vf_coeff", p.vf_coeff.to_string()),
            ("entropy_coeff", p.entropy_coeff.to_string()),
            ("max_grad_norm", p.max_grad_norm.to_string()),
            ("lambda0", p.lambda0.to_string()),
            ("lambda1", p.lambda1.to_string()),
            ("alpha", p.alpha.to_string()),
            ("ld_weight", p.ld_weight.to_string()),
            ("num_minibatches", p.num_minibatches.to_string()),
            ("update_epochs", p.update_epochs.to_string()),
            ("double_critic", p.double_critic.to_string()),
        ];
        v.sort_by_key(|(k, _)| *k);
        v
    }

    pub fn canonical(&self) -> String {
        self.pairs().iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    /// Hex SHA-256 of [`Self::canonical`].
    pub fn fingerprint(&self) -> String {
        Sha256::digest(self.canonical().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
