use std::fmt;
use std::str::FromStr;

use crate::error::EnvError;

/// How much of the hidden state an observation exposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObservabilityLevel {
    /// The environment's native partial observation.
    Partial,
    /// A Markov summary of the history that reveals no hidden world variables.
    PerfectMemory,
    /// The full underlying state.
    FullState,
}

impl ObservabilityLevel {
    pub const ALL: [ObservabilityLevel; 3] = [
        ObservabilityLevel::Partial,
        ObservabilityLevel::PerfectMemory,
        ObservabilityLevel::FullState,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ObservabilityLevel::Partial => "partial",
            ObservabilityLevel::PerfectMemory => "perfect_memory",
            ObservabilityLevel::FullState => "full_state",
        }
    }
}

impl fmt::Display for ObservabilityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ObservabilityLevel {
    type Err = EnvError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "partial" => Ok(ObservabilityLevel::Partial),
            "perfect_memory" | "perfectmemory" | "memory" => Ok(ObservabilityLevel::PerfectMemory),
            "full_state" | "fullstate" | "full" => Ok(ObservabilityLevel::FullState),
            other => Err(EnvError::Config(format!("unknown observability level '{other}'"))),
        }
    }
}

/// Legal-action flags for the next step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionMask(pub Vec<bool>);

impl ActionMask {
    pub fn all(n: usize) -> Self {
        ActionMask(vec![true; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_legal(&self, action: usize) -> bool {
        self.0.get(action).copied().unwrap_or(false)
    }

    pub fn count_legal(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }
}

/// Everything an environment reports after one transition.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub obs: Vec<f32>,
    pub reward: f64,
    pub terminated: bool,
    pub truncated: bool,
    pub mask: ActionMask,
}

impl StepResult {
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

/// Static description of an environment instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Capabilities {
    pub id: String,
    pub levels: Vec<ObservabilityLevel>,
    pub obs_dims: Vec<(ObservabilityLevel, usize)>,
    pub num_actions: usize,
    pub reward_range: (f64, f64),
    pub gamma: f64,
    pub max_steps: usize,
}

impl Capabilities {
    pub fn supports(&self, level: ObservabilityLevel) -> bool {
        self.levels.contains(&level)
    }
}

/// Running discounted sum of a reward sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscountedReturnAccumulator {
    gamma: f64,
    running_discount: f64,
    total: f64,
}

impl DiscountedReturnAccumulator {
    pub fn new(gamma: f64) -> Self {
        debug_assert!((0.0..=1.0).contains(&gamma));
        Self {
            gamma,
            running_discount: 1.0,
            total: 0.0,
        }
    }

    pub fn push(&mut self, reward: f64) {
        self.total += self.running_discount * reward;
        self.running_discount *= self.gamma;
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn reset(&mut self) {
        self.running_discount = 1.0;
        self.total = 0.0;
    }
}

/// `sum_i gamma^i * r_i`.
pub fn discounted_return(rewards: &[f64], gamma: f64) -> f64 {
    let mut acc = DiscountedReturnAccumulator::new(gamma);
    for &r in rewards {
        acc.push(r);
    }
    acc.total()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn discounted_return_examples() {
        assert_eq!(discounted_return(&[], 0.99), 0.0);
        assert_eq!(discounted_return(&[1.0, 1.0, 1.0], 1.0), 3.0);
        let mut rs = vec![0.0; 12];
        rs[11] = 4.0;
        let expected = 4.0 * 0.99f64.powi(11);
        assert!((discounted_return(&rs, 0.99) - expected).abs() < 1e-12);
        assert!((expected - 3.5814).abs() < 1e-4);
    }

    #[test]
    fn level_parse_roundtrip() {
        for l in ObservabilityLevel::ALL {
            assert_eq!(l.as_str().parse::<ObservabilityLevel>().unwrap(), l);
        }
        assert!("sideways".parse::<ObservabilityLevel>().is_err());
    }

    proptest! {
        #[test]
        fn accumulator_matches_power_sum(
            rewards in proptest::collection::vec(-10.0f64..10.0, 0..200),
            gamma in 0.0f64..=1.0,
        ) {
            let reference: f64 = rewards
                .iter()
                .enumerate()
                .map(|(i, r)| gamma.powi(i as i32) * r)
                .sum();
            prop_assert!((discounted_return(&rewards, gamma) - reference).abs() < 1e-9);
        }
    }
}
