//! Training hyperparameters as flat `key = value` text.

use std::fmt::Write as _;

use pomem_agents::{PpoConfig, TrainConfig};
use pomem_core::ObservabilityLevel;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub num_envs: usize,
    pub num_steps: usize,
    pub num_minibatches: usize,
    pub double_critic: bool,
    pub action_concat: bool,
    pub lr: f64,
    pub lambda0: f64,
    pub lambda1: f64,
    pub alpha: f64,
    pub ld_weight: f64,
    pub vf_coeff: f64,
    pub hidden_size: usize,
    pub total_steps: u64,
    pub entropy_coeff: f64,
    pub clip_eps: f64,
    pub max_grad_norm: f64,
    pub anneal_lr: bool,
    pub seed: u64,
    pub n_seeds: usize,
    pub save_checkpoints: bool,
}

impl Default for CliConfig {
    fn default() -> Self {
        Self {
            num_envs: 4,
            num_steps: 128,
            num_minibatches: 4,
            double_critic: false,
            action_concat: false,
            lr: 2.5e-4,
            lambda0: 0.95,
            lambda1: 0.5,
            alpha: 1.0,
            ld_weight: 0.0,
            vf_coeff: 0.5,
            hidden_size: 128,
            total_steps: 1_500_000,
            entropy_coeff: 0.01,
            clip_eps: 0.2,
            max_grad_norm: 0.5,
            anneal_lr: true,
            seed: 2020,
            n_seeds: 5,
            save_checkpoints: false,
        }
    }
}

pub const KEYS: [&str; 20] = [
    "num_envs",
    "num_steps",
    "num_minibatches",
    "double_critic",
    "action_concat",
    "lr",
    "lambda0",
    "lambda1",
    "alpha",
    "ld_weight",
    "vf_coeff",
    "hidden_size",
    "total_steps",
    "entropy_coeff",
    "clip_eps",
    "max_grad_norm",
    "anneal_lr",
    "seed",
    "n_seeds",
    "save_checkpoints",
];

/// A single-element list `[x]` is accepted for any value.
fn unwrap_list(v: &str) -> Result<&str, String> {
    match v.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
        Some(inner) if inner.contains(',') => Err(format!("expected one value, got list `{v}`")),
        Some(inner) => Ok(inner.trim()),
        None => Ok(v),
    }
}

fn parse_f64(v: &str) -> Result<f64, String> {
    let x: f64 = v.parse().map_err(|_| format!("expected a number, got `{v}`"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("expected a finite number, got `{v}`"))
    }
}

/// Integers may be written in exponent form, e.g. `1.5e6`.
fn parse_u64(v: &str) -> Result<u64, String> {
    if let Ok(n) = v.parse::<u64>() {
        return Ok(n);
    }
    let x = parse_f64(v).map_err(|_| format!("expected a non-negative integer, got `{v}`"))?;
    if x >= 0.0 && x.fract() == 0.0 && x < u64::MAX as f64 {
        Ok(x as u64)
    } else {
        Err(format!("expected a non-negative integer, got `{v}`"))
    }
}

fn parse_usize(v: &str) -> Result<usize, String> {
    parse_u64(v).and_then(|n| usize::try_from(n).map_err(|_| format!("`{v}` is too large")))
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v.to_ascii_lowercase().as_str() {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("expected true or false, got `{v}`")),
    }
}

impl CliConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = unwrap_list(value.trim())?;
        match key {
            "num_envs" => self.num_envs = parse_usize(v)?,
            "num_steps" => self.num_steps = parse_usize(v)?,
            "num_minibatches" => self.num_minibatches = parse_usize(v)?,
            "double_critic" => self.double_critic = parse_bool(v)?,
            "action_concat" => self.action_concat = parse_bool(v)?,
            "lr" => self.lr = parse_f64(v)?,
            "lambda0" => self.lambda0 = parse_f64(v)?,
            "lambda1" => self.lambda1 = parse_f64(v)?,
            "alpha" => self.alpha = parse_f64(v)?,
            "ld_weight" => self.ld_weight = parse_f64(v)?,
            "vf_coeff" => self.vf_coeff = parse_f64(v)?,
            "hidden_size" => self.hidden_size = parse_usize(v)?,
            "total_steps" => self.total_steps = parse_u64(v)?,
            "entropy_coeff" => self.entropy_coeff = parse_f64(v)?,
            "clip_eps" => self.clip_eps = parse_f64(v)?,
            "max_grad_norm" => self.max_grad_norm = parse_f64(v)?,
            "anneal_lr" => self.anneal_lr = parse_bool(v)?,
            "seed" => self.seed = parse_u64(v)?,
            "n_seeds" => self.n_seeds = parse_usize(v)?,
            "save_checkpoints" => self.save_checkpoints = parse_bool(v)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "num_envs" => self.num_envs.to_string(),
            "num_steps" => self.num_steps.to_string(),
            "num_minibatches" => self.num_minibatches.to_string(),
            "double_critic" => self.double_critic.to_string(),
            "action_concat" => self.action_concat.to_string(),
            "lr" => self.lr.to_string(),
            "lambda0" => self.lambda0.to_string(),
            "lambda1" => self.lambda1.to_string(),
            "alpha" => self.alpha.to_string(),
            "ld_weight" => self.ld_weight.to_string(),
            "vf_coeff" => self.vf_coeff.to_string(),
            "hidden_size" => self.hidden_size.to_string(),
            "total_steps" => self.total_steps.to_string(),
            "entropy_coeff" => self.entropy_coeff.to_string(),
            "clip_eps" => self.clip_eps.to_string(),
            "max_grad_norm" => self.max_grad_norm.to_string(),
            "anneal_lr" => self.anneal_lr.to_string(),
            "seed" => self.seed.to_string(),
            "n_seeds" => self.n_seeds.to_string(),
            "save_checkpoints" => self.save_checkpoints.to_string(),
            _ => return None,
        })
    }

    /// Defaults overridden by the file's entries. Blank lines and `#`
    /// comments are skipped; each key may appear once.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        let mut seen: Vec<&str> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| CliError::ConfigLine { line: i + 1, msg };
            let (k, v) = line.split_once('=').ok_or_else(|| bad(format!("expected `key = value`, got `{line}`")))?;
            let k = k.trim();
            if seen.contains(&k) {
                return Err(bad(format!("duplicate key `{k}`")));
            }
            cfg.set(k, v).map_err(bad)?;
            seen.push(k);
        }
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for k in KEYS {
            let _ = writeln!(s, "{k} = {}", self.get(k).unwrap_or_default());
        }
        s
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Usage(m));
        if self.n_seeds == 0 {
            return bad("n_seeds must be positive".into());
        }
        for (name, v) in [
            ("clip_eps", self.clip_eps),
            ("vf_coeff", self.vf_coeff),
            ("entropy_coeff", self.entropy_coeff),
            ("ld_weight", self.ld_weight),
        ] {
            if v < 0.0 {
                return bad(format!("{name} must be non-negative, got {v}"));
            }
        }
        if self.max_grad_norm <= 0.0 {
            return bad(format!("max_grad_norm must be positive, got {}", self.max_grad_norm));
        }
        if self.hidden_size == 0 {
            return bad("hidden_size must be positive".into());
        }
        self.train_config(ObservabilityLevel::Partial, 1)
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))
    }

    /// Torso and critic count are left at their defaults; the agent kind
    /// decides them.
    pub fn train_config(&self, level: ObservabilityLevel, workers: usize) -> TrainConfig {
        TrainConfig {
            level,
            num_envs: self.num_envs,
            num_steps: self.num_steps,
            total_steps: self.total_steps,
            hidden_size: self.hidden_size,
            action_concat: self.action_concat,
            lr: self.lr,
            anneal_lr: self.anneal_lr,
            seed: self.seed,
            workers,
            ppo: PpoConfig {
                clip_eps: self.clip_eps,
                vf_coeff: self.vf_coeff,
                entropy_coeff: self.entropy_coeff,
                max_grad_norm: self.max_grad_norm,
                lambda0: self.lambda0,
                lambda1: self.lambda1,
                alpha: self.alpha,
                ld_weight: self.ld_weight,
                num_minibatches: self.num_minibatches,
                double_critic: self.double_critic,
                ..PpoConfig::default()
            },
            ..TrainConfig::default()
        }
    }
}
