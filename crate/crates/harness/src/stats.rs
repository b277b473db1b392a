//! Seed-level statistics: Student-t intervals and a percentile bootstrap.

use pomem_core::RngStream;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
}

/// `mean ± t_{(1+level)/2, n-1} · s / sqrt(n)` with the sample standard
/// deviation `s`.
pub fn confidence_interval(values: &[f64], level: f64) -> Result<Interval> {
    let n = values.len();
    if n < 2 {
        return Err(HarnessError::Contract(format!("confidence interval needs at least 2 values, got {n}")));
    }
    if !(0.0 < level && level < 1.0) {
        return Err(HarnessError::Contract(format!("level must be in (0, 1), got {level}")));
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let t = StudentsT::new(0.0, 1.0, nf - 1.0)
        .expect("valid t parameters")
        .inverse_cdf(0.5 + level / 2.0);
    let half = t * var.sqrt() / nf.sqrt();
    Ok(Interval {
        mean,
        lo: mean - half,
        hi: mean + half,
    })
}

/// Empirical quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < n {
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    } else {
        sorted[n - 1]
    }
}

/// Indices of a resample with replacement of `0..n`.
pub fn resample_indices(n: usize, rng: &mut RngStream) -> Vec<usize> {
    (0..n).map(|_| rng.below(n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_values_collapse() {
        let ci = confidence_interval(&[2.5; 7], 0.95).unwrap();
        assert_eq!((ci.lo, ci.mean, ci.hi), (2.5, 2.5, 2.5));
    }

    #[test]
    fn too_few_values() {
        assert!(confidence_interval(&[1.0], 0.95).is_err());
    }

    #[test]
    fn quantiles() {
        let s = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&s, 0.5), 3.0);
        assert_eq!(quantile(&s, 0.125), 1.5);
        assert_eq!(quantile(&s, 1.0), 5.0);
    }
}
