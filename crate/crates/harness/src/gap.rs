//! How much of the gap between a memoryless agent given partial and given
//! full information a memory agent closes.

use std::fmt::Write as _;

use pomem_core::RngStream;

use crate::curve::{auc, mean_curve};
use crate::error::{HarnessError, Result};
use crate::stats::{quantile, resample_indices};

pub const BOOTSTRAP_SAMPLES: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub floor_auc: f64,
    pub ceiling_auc: f64,
    pub memory_auc: f64,
    /// `ceiling_auc - floor_auc`
    pub gap: f64,
    /// 95% percentile-bootstrap interval of the gap over seeds.
    pub gap_ci: (f64, f64),
    /// `(memory_auc - floor_auc) / gap`; NaN without a positive gap.
    pub closure: f64,
    pub closure_ci: (f64, f64),
    /// The gap's interval lies strictly above zero.
    pub memory_improvable: bool,
}

impl GapReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "floor_auc={}", self.floor_auc);
        let _ = writeln!(s, "ceiling_auc={}", self.ceiling_auc);
        let _ = writeln!(s, "memory_auc={}", self.memory_auc);
        let _ = writeln!(s, "gap={}", self.gap);
        let _ = writeln!(s, "gap_ci_lo={}", self.gap_ci.0);
        let _ = writeln!(s, "gap_ci_hi={}", self.gap_ci.1);
        let _ = writeln!(s, "closure={}", self.closure);
        let _ = writeln!(s, "closure_ci_lo={}", self.closure_ci.0);
        let _ = writeln!(s, "closure_ci_hi={}", self.closure_ci.1);
        let verdict = if self.memory_improvable { "memory improvable" } else { "not memory improvable" };
        let _ = writeln!(s, "verdict={verdict}");
        s
    }
}

fn pick(curves: &[Vec<f64>], idx: &[usize]) -> Vec<Vec<f64>> {
    idx.iter().map(|&i| curves[i].clone()).collect()
}

/// Per-seed curves of the three arms, all on the grid `xs`. Seeds are
/// resampled independently within each arm for the intervals.
pub fn improvability_gap(xs: &[f64], floor: &[Vec<f64>], ceiling: &[Vec<f64>], memory: &[Vec<f64>], seed: u64) -> Result<GapReport> {
    for arm in [floor, ceiling, memory] {
        if arm.is_empty() {
            return Err(HarnessError::Contract("every arm needs at least one run".into()));
        }
        if arm.iter().any(|c| c.len() != xs.len()) {
            return Err(HarnessError::Contract("curves are not aligned with the step grid".into()));
        }
    }
    let area = |c: &[Vec<f64>]| -> Result<f64> { Ok(auc(xs, &mean_curve(c)?)) };
    let (fa, ca, ma) = (area(floor)?, area(ceiling)?, area(memory)?);
    let gap = ca - fa;
    let closure = if gap > 0.0 { (ma - fa) / gap } else { f64::NAN };

    let mut rng = RngStream::new(seed, pomem_core::rng::tag_id("gap-bootstrap"));
    let mut gaps = Vec::with_capacity(BOOTSTRAP_SAMPLES);
    let mut closures = Vec::with_capacity(BOOTSTRAP_SAMPLES);
    for _ in 0..BOOTSTRAP_SAMPLES {
        let f = area(&pick(floor, &resample_indices(floor.len(), &mut rng)))?;
        let c = area(&pick(ceiling, &resample_indices(ceiling.len(), &mut rng)))?;
        let m = area(&pick(memory, &resample_indices(memory.len(), &mut rng)))?;
        gaps.push(c - f);
        if c - f > 0.0 {
            closures.push((m - f) / (c - f));
        }
    }
    gaps.sort_by(f64::total_cmp);
    closures.sort_by(f64::total_cmp);
    let gap_ci = (quantile(&gaps, 0.025), quantile(&gaps, 0.975));
    let closure_ci = if closures.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        (quantile(&closures, 0.025), quantile(&closures, 0.975))
    };
    Ok(GapReport {
        floor_auc: fa,
        ceiling_auc: ca,
        memory_auc: ma,
        gap,
        gap_ci,
        closure,
        closure_ci,
        memory_improvable: gap > 0.0 && gap_ci.0 > 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arm(base: f64) -> Vec<Vec<f64>> {
        (0..5).map(|i| vec![base + 0.01 * i as f64; 8]).collect()
    }

    fn xs() -> Vec<f64> {
        (1..=8).map(f64::from).collect()
    }

    #[test]
    fn closure_endpoints() {
        let r = improvability_gap(&xs(), &arm(1.0), &arm(3.0), &arm(1.0), 0).unwrap();
        assert!(r.closure.abs() < 1e-12);
        assert!(r.memory_improvable);
        let r = improvability_gap(&xs(), &arm(1.0), &arm(3.0), &arm(3.0), 0).unwrap();
        assert!((r.closure - 1.0).abs() < 1e-12);
    }

    #[test]
    fn no_gap_is_not_improvable() {
        let r = improvability_gap(&xs(), &arm(2.0), &arm(2.0), &arm(2.5), 0).unwrap();
        assert_eq!(r.gap, 0.0);
        assert!(!r.memory_improvable);
        assert!(r.closure.is_nan());
        assert!(r.to_text().contains("verdict=not memory improvable"));
    }

    #[test]
    fn misaligned_curves_rejected() {
        assert!(improvability_gap(&xs(), &[vec![1.0; 3]], &arm(2.0), &arm(2.0), 0).is_err());
    }
}
