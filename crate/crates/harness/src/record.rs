//! Per-run learning curves and their on-disk text form.
//!
//! ```text
//! # run-record 1
//! fingerprint=<hex>
//! seed=<u64>
//! total_steps=<u64>
//! # env_step discounted undiscounted
//! 1024 3.7658 4
//! ```
//!
//! One data line per completed episode, in order of completion.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{HarnessError, Result};

const HEADER: &str = "# run-record 1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodePoint {
    pub env_step: u64,
    pub discounted: f64,
    pub undiscounted: f64,
}

/// Which per-episode return a curve is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    Discounted,
    Undiscounted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub fingerprint: String,
    pub seed: u64,
    pub total_steps: u64,
    pub points: Vec<EpisodePoint>,
    /// Not written to disk, so record files stay reproducible.
    pub wall_seconds: f64,
}

impl RunRecord {
    pub fn series(&self, metric: Metric) -> Vec<(u64, f64)> {
        self.points
            .iter()
            .map(|p| {
                let v = match metric {
                    Metric::Discounted => p.discounted,
                    Metric::Undiscounted => p.undiscounted,
                };
                (p.env_step, v)
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(64 + 32 * self.points.len());
        let _ = writeln!(s, "{HEADER}");
        let _ = writeln!(s, "fingerprint={}", self.fingerprint);
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "total_steps={}", self.total_steps);
        let _ = writeln!(s, "# env_step discounted undiscounted");
        for p in &self.points {
            let _ = writeln!(s, "{} {} {}", p.env_step, p.discounted, p.undiscounted);
        }
        s
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let err = |line: usize, msg: &str| HarnessError::Record {
            path: source.to_string(),
            msg: format!("line {}: {msg}", line + 1),
        };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, HEADER)) => {}
            _ => return Err(err(0, "missing header")),
        }
        let mut field = |name: &str| -> Result<String> {
            let (i, l) = lines.next().ok_or_else(|| err(0, "truncated header"))?;
            l.strip_prefix(name)
                .and_then(|r| r.strip_prefix('='))
                .map(str::to_string)
                .ok_or_else(|| err(i, &format!("expected {name}=")))
        };
        let fingerprint = field("fingerprint")?;
        let seed = field("seed")?.parse().map_err(|_| err(2, "bad seed"))?;
        let total_steps = field("total_steps")?.parse().map_err(|_| err(3, "bad total_steps"))?;
        let mut points = Vec::new();
        for (i, l) in lines {
            if l.starts_with('#') || l.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = l.split_whitespace().collect();
            if cols.len() != 3 {
                return Err(err(i, "expected 3 columns"));
            }
            let p = EpisodePoint {
                env_step: cols[0].parse().map_err(|_| err(i, "bad env_step"))?,
                discounted: cols[1].parse().map_err(|_| err(i, "bad return"))?,
                undiscounted: cols[2].parse().map_err(|_| err(i, "bad return"))?,
            };
            if points.last().is_some_and(|q: &EpisodePoint| q.env_step > p.env_step) {
                return Err(err(i, "env_step decreases"));
            }
            points.push(p);
        }
        Ok(Self {
            fingerprint,
            seed,
            total_steps,
            points,
            wall_seconds: 0.0,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?, &path.display().to_string())
    }
}
