//! Categorical distribution over the legal actions only.

use pomem_core::RngStream;

/// Write log-probabilities of a softmax restricted to legal actions.
/// Illegal entries get `-inf`. Returns false if no action is legal.
pub fn masked_log_softmax(logits: &[f64], mask: &[bool], logp: &mut [f64]) -> bool {
    let max = logits
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(&l, _)| l)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return false;
    }
    let sum: f64 = logits
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(&l, _)| (l - max).exp())
        .sum();
    let lse = max + sum.ln();
    for ((lp, &l), &m) in logp.iter_mut().zip(logits).zip(mask) {
        *lp = if m { l - lse } else { f64::NEG_INFINITY };
    }
    true
}

/// Entropy of a distribution given by its log-probabilities.
pub fn entropy(logp: &[f64]) -> f64 {
    -logp
        .iter()
        .filter(|l| l.is_finite())
        .map(|&l| l.exp() * l)
        .sum::<f64>()
}

/// Inverse-CDF sample. Zero-probability actions are never chosen.
pub fn sample(logp: &[f64], rng: &mut RngStream) -> usize {
    let u = rng.uniform();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &l) in logp.iter().enumerate() {
        if l == f64::NEG_INFINITY {
            continue;
        }
        acc += l.exp();
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_legal_action_is_certain() {
        let mut lp = [0.0; 3];
        masked_log_softmax(&[5.0, -2.0, 1.0], &[false, true, false], &mut lp);
        assert_eq!(lp[1], 0.0);
        let mut rng = RngStream::new(0, 0);
        assert!((0..100).all(|_| sample(&lp, &mut rng) == 1));
    }

    #[test]
    fn four_legal_of_a_hundred() {
        let mut mask = [false; 100];
        let legal = [3, 17, 58, 99];
        for &i in &legal {
            mask[i] = true;
        }
        let mut lp = [0.0; 100];
        masked_log_softmax(&[0.0; 100], &mask, &mut lp);
        let mut counts = [0usize; 100];
        let mut rng = RngStream::new(9, 0);
        let n = 100_000;
        for _ in 0..n {
            counts[sample(&lp, &mut rng)] += 1;
        }
        for (i, &c) in counts.iter().enumerate() {
            if legal.contains(&i) {
                assert!((c as f64 / n as f64 - 0.25).abs() < 0.01);
            } else {
                assert_eq!(c, 0);
            }
        }
    }

    #[test]
    fn masked_entries_have_zero_mass() {
        let mut lp = [0.0; 4];
        assert!(masked_log_softmax(&[3.0, 1.0, 100.0, 0.0], &[true, true, false, true], &mut lp));
        assert_eq!(lp[2], f64::NEG_INFINITY);
        let total: f64 = lp.iter().map(|l| l.exp()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(!masked_log_softmax(&[1.0, 2.0], &[false, false], &mut [0.0; 2]));
    }

    #[test]
    fn uniform_entropy() {
        let mut lp = [0.0; 4];
        masked_log_softmax(&[0.5; 4], &[true, false, true, true], &mut lp);
        assert!((entropy(&lp) - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn sample_frequencies() {
        let mut lp = [0.0; 3];
        masked_log_softmax(&[0.0, 2f64.ln(), 9.0], &[true, true, false], &mut lp);
        let mut rng = RngStream::new(3, 0);
        let mut counts = [0usize; 3];
        let n = 60_000;
        for _ in 0..n {
            counts[sample(&lp, &mut rng)] += 1;
        }
        assert_eq!(counts[2], 0);
        let f1 = counts[1] as f64 / n as f64;
        assert!((f1 - 2.0 / 3.0).abs() < 0.01, "{f1}");
    }
}
