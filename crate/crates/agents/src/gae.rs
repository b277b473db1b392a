//! Generalised advantage estimation over one environment's rollout segment.

/// One environment's segment of a rollout, as seen by the estimator.
#[derive(Debug, Clone, Copy)]
pub struct Segment<'a> {
    pub rewards: &'a [f64],
    pub values: &'a [f64],
    pub terminated: &'a [bool],
    pub truncated: &'a [bool],
    /// Value of the last observation of an episode cut off at step `t`; read
    /// only where `truncated[t]`.
    pub truncation_values: &'a [f64],
    /// Value of the observation following the final step.
    pub bootstrap_value: f64,
}

/// Advantages and value targets (`advantage + value`).
///
/// Terminal steps have no successor value. Truncated steps bootstrap from the
/// value of their final observation. Neither kind lets the recursion cross
/// into the next episode.
pub fn gae(seg: &Segment, gamma: f64, lambda: f64) -> (Vec<f64>, Vec<f64>) {
    let n = seg.rewards.len();
    let mut adv = vec![0.0; n];
    let mut running = 0.0;
    for t in (0..n).rev() {
        let (next_value, carry) = if seg.terminated[t] {
            (0.0, 0.0)
        } else if seg.truncated[t] {
            (seg.truncation_values[t], 0.0)
        } else if t + 1 == n {
            (seg.bootstrap_value, 0.0)
        } else {
            (seg.values[t + 1], running)
        };
        let delta = seg.rewards[t] + gamma * next_value - seg.values[t];
        running = delta + gamma * lambda * carry;
        adv[t] = running;
    }
    let targets = adv.iter().zip(seg.values).map(|(a, v)| a + v).collect();
    (adv, targets)
}

/// Normalise to zero mean and unit standard deviation.
pub fn normalize(xs: &mut [f64]) {
    if xs.is_empty() {
        return;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    for x in xs.iter_mut() {
        *x = (*x - mean) / (std + 1e-8);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_terminal_step() {
        let seg = Segment {
            rewards: &[1.0],
            values: &[0.25],
            terminated: &[true],
            truncated: &[false],
            truncation_values: &[0.0],
            bootstrap_value: 99.0,
        };
        let (a, t) = gae(&seg, 0.9, 0.5);
        assert_eq!(a, vec![0.75]);
        assert_eq!(t, vec![1.0]);
    }

    #[test]
    fn normalize_moments() {
        let mut x = [1.0, 2.0, 3.0, 6.0];
        normalize(&mut x);
        let mean: f64 = x.iter().sum::<f64>() / 4.0;
        let var: f64 = x.iter().map(|v| v * v).sum::<f64>() / 4.0;
        assert!(mean.abs() < 1e-12 && (var - 1.0).abs() < 1e-6);
    }
}
