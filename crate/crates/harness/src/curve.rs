//! Learning curves on a common step grid, and their area under the curve.

use crate::error::{HarnessError, Result};

pub const GRID_POINTS: usize = 512;

/// Right edges of `n` equal buckets covering `(0, total_steps]`.
pub fn grid(total_steps: u64, n: usize) -> Vec<f64> {
    (1..=n).map(|k| total_steps as f64 * k as f64 / n as f64).collect()
}

/// Put per-episode returns on the grid: each point is the mean return of the
/// episodes finishing in its bucket, or the previous point's value when the
/// bucket is empty. Buckets before the first episode take its bucket's value.
/// `None` if no episode finished.
pub fn resample(points: &[(u64, f64)], total_steps: u64, n: usize) -> Option<Vec<f64>> {
    if points.is_empty() || total_steps == 0 {
        return None;
    }
    let mut sum = vec![0.0; n];
    let mut count = vec![0usize; n];
    for &(step, v) in points {
        // Bucket k covers (k * T / n, (k + 1) * T / n].
        let k = ((step.max(1) - 1) as u128 * n as u128 / total_steps as u128) as usize;
        let k = k.min(n - 1);
        sum[k] += v;
        count[k] += 1;
    }
    let first = count.iter().position(|&c| c > 0)?;
    let mut out = vec![0.0; n];
    let mut last = sum[first] / count[first] as f64;
    for k in 0..n {
        if count[k] > 0 {
            last = sum[k] / count[k] as f64;
        }
        out[k] = last;
    }
    Some(out)
}

/// Pointwise mean of equally long curves.
pub fn mean_curve(curves: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = curves
        .first()
        .ok_or_else(|| HarnessError::Contract("no curves to average".into()))?;
    if curves.iter().any(|c| c.len() != first.len()) {
        return Err(HarnessError::Contract("curves are not aligned".into()));
    }
    let n = curves.len() as f64;
    Ok((0..first.len()).map(|i| curves.iter().map(|c| c[i]).sum::<f64>() / n).collect())
}

/// Trapezoidal area under `ys` over `xs`, divided by the covered step range.
/// A single point's "area" is its value.
pub fn auc(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len(), "auc: length mismatch");
    match xs.len() {
        0 => f64::NAN,
        1 => ys[0],
        n => {
            let area: f64 = (1..n).map(|i| 0.5 * (ys[i] + ys[i - 1]) * (xs[i] - xs[i - 1])).sum();
            area / (xs[n - 1] - xs[0])
        }
    }
}

/// Mean return of the episodes finishing in the last `fraction` of training.
/// Falls back to the last episode if none finished in that window.
pub fn final_return(points: &[(u64, f64)], total_steps: u64, fraction: f64) -> Option<f64> {
    let cutoff = total_steps as f64 * (1.0 - fraction);
    let tail: Vec<f64> = points.iter().filter(|(s, _)| *s as f64 > cutoff).map(|&(_, v)| v).collect();
    if tail.is_empty() {
        points.last().map(|&(_, v)| v)
    } else {
        Some(tail.iter().sum::<f64>() / tail.len() as f64)
    }
}
