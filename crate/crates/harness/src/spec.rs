//! Experiment specs: flat `key = value` files, `#` comments, comma-separated
//! lists for swept hyperparameters.
//!
//! ```text
//! env = tmaze_5
//! agents = rnn
//! total_steps = 500000
//! lr = 2.5e-3, 2.5e-4
//! lambda0 = 0.7, 0.95
//! ```

use std::collections::HashSet;
use std::str::FromStr;

use pomem_core::ObservabilityLevel;

use crate::config::AgentKind;
use crate::error::{HarnessError, Result};
use crate::record::Metric;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub env: String,
    /// Level the memory agents see.
    pub level: ObservabilityLevel,
    /// `None` picks full state, or perfect memory where full state is absent.
    pub ceiling_level: Option<ObservabilityLevel>,
    /// Memory agents compared against the floor and ceiling.
    pub agents: Vec<AgentKind>,
    pub total_steps: u64,
    /// Training length of sweep runs; defaults to `total_steps`.
    pub sweep_steps: Option<u64>,
    pub num_envs: usize,
    pub num_steps: usize,
    pub hidden_size: usize,
    pub n_sweep: usize,
    pub n_final: usize,
    pub seed: u64,
    /// Previous-action input for the memory agents.
    pub action_concat: bool,
    pub lr: Vec<f64>,
    pub lambda0: Vec<f64>,
    /// Second-critic lambda, swept for `ld` only.
    pub lambda1: Vec<f64>,
    /// Discrepancy loss weight, swept for `ld` only.
    pub beta: Vec<f64>,
    pub alpha: f64,
    pub metric: Metric,
    /// Fraction of training whose episodes make up the final return.
    pub final_fraction: f64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            env: String::new(),
            level: ObservabilityLevel::Partial,
            ceiling_level: None,
            agents: vec![AgentKind::Rnn],
            total_steps: 1_500_000,
            sweep_steps: None,
            num_envs: 4,
            num_steps: 128,
            hidden_size: 128,
            n_sweep: 1,
            n_final: 5,
            seed: 2020,
            action_concat: true,
            lr: vec![2.5e-4],
            lambda0: vec![0.95],
            lambda1: vec![0.5],
            beta: vec![0.0],
            alpha: 1.0,
            metric: Metric::Discounted,
            final_fraction: 0.1,
        }
    }
}

fn one<T: FromStr>(v: &str, line: usize, key: &str) -> Result<T> {
    v.parse().map_err(|_| HarnessError::Spec {
        line,
        msg: format!("cannot parse `{v}` for {key}"),
    })
}

fn list<T: FromStr>(v: &str, line: usize, key: &str) -> Result<Vec<T>> {
    let items: Vec<T> = v
        .split(',')
        .map(|s| one(s.trim(), line, key))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(HarnessError::Spec {
            line,
            msg: format!("{key} needs at least one value"),
        });
    }
    Ok(items)
}

impl ExperimentSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Self::default();
        let mut seen = HashSet::new();
        let mut env_line = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) = content.split_once('=').ok_or_else(|| HarnessError::Spec {
                line,
                msg: format!("expected `key = value`, got `{content}`"),
            })?;
            let (k, v) = (k.trim(), v.trim());
            if !seen.insert(k.to_string()) {
                return Err(HarnessError::Spec {
                    line,
                    msg: format!("duplicate key {k}"),
                });
            }
            match k {
                "env" => {
                    s.env = v.to_string();
                    env_line = Some(line);
                }
                "level" => s.level = one(v, line, k)?,
                "ceiling_level" => {
                    s.ceiling_level = if v == "auto" { None } else { Some(one(v, line, k)?) };
                }
                "agents" => {
                    s.agents = v
                        .split(',')
                        .map(|a| {
                            a.trim().parse::<AgentKind>().map_err(|e| HarnessError::Spec {
                                line,
                                msg: e.to_string(),
                            })
                        })
                        .collect::<Result<_>>()?;
                    if s.agents.contains(&AgentKind::Memoryless) {
                        return Err(HarnessError::Spec {
                            line,
                            msg: "memoryless runs are the floor and ceiling; list memory agents only".into(),
                        });
                    }
                }
                "total_steps" => s.total_steps = one(v, line, k)?,
                "sweep_steps" => s.sweep_steps = Some(one(v, line, k)?),
                "num_envs" => s.num_envs = one(v, line, k)?,
                "num_steps" => s.num_steps = one(v, line, k)?,
                "hidden_size" => s.hidden_size = one(v, line, k)?,
                "n_sweep" => s.n_sweep = one(v, line, k)?,
                "n_final" => s.n_final = one(v, line, k)?,
                "seed" => s.seed = one(v, line, k)?,
                "action_concat" => s.action_concat = one(v, line, k)?,
                "lr" => s.lr = list(v, line, k)?,
                "lambda0" => s.lambda0 = list(v, line, k)?,
                "lambda1" => s.lambda1 = list(v, line, k)?,
                "beta" | "ld_weight" => s.beta = list(v, line, k)?,
                "alpha" => s.alpha = one(v, line, k)?,
                "metric" => {
                    s.metric = match v {
                        "discounted" => Metric::Discounted,
                        "undiscounted" => Metric::Undiscounted,
                        _ => {
                            return Err(HarnessError::Spec {
                                line,
                                msg: format!("metric must be discounted or undiscounted, got `{v}`"),
                            })
                        }
                    }
                }
                "final_fraction" => s.final_fraction = one(v, line, k)?,
                _ => {
                    return Err(HarnessError::Spec {
                        line,
                        msg: format!("unknown key {k}"),
                    })
                }
            }
        }
        if env_line.is_none() {
            return Err(HarnessError::Spec {
                line: text.lines().count().max(1),
                msg: "missing required key env".into(),
            });
        }
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(HarnessError::Config(m.to_string()));
        if self.n_sweep == 0 || self.n_final == 0 {
            return bad("n_sweep and n_final must be positive");
        }
        if self.agents.is_empty() {
            return bad("at least one memory agent is required");
        }
        if !(self.final_fraction > 0.0 && self.final_fraction <= 1.0) {
            return bad("final_fraction must be in (0, 1]");
        }
        if self.total_steps == 0 || self.sweep_steps == Some(0) {
            return bad("step budgets must be positive");
        }
        Ok(())
    }

    pub fn sweep_steps(&self) -> u64 {
        self.sweep_steps.unwrap_or(self.total_steps)
    }
}
