//! Savitzky–Golay smoothing for presented curves only. Statistics are always
//! computed on the raw resampled curves.

/// Least-squares polynomial of degree `degree` fitted over a window of
/// `window` points around each sample, evaluated at that sample. Windows are
/// clipped at the ends of the series.
pub fn savitzky_golay(ys: &[f64], window: usize, degree: usize) -> Vec<f64> {
    let n = ys.len();
    if n == 0 || window <= degree {
        return ys.to_vec();
    }
    let left = window / 2;
    let right = window - 1 - left;
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(left);
            let hi = (i + right).min(n - 1);
            if hi - lo < degree {
                return ys[i];
            }
            fit_at(&ys[lo..=hi], (i - lo) as f64, degree)
        })
        .collect()
}

/// Fit `sum_k c_k t^k` to `(j, ys[j])` and evaluate at `at`.
fn fit_at(ys: &[f64], at: f64, degree: usize) -> f64 {
    let m = degree + 1;
    // Centre and scale the abscissa for conditioning.
    let mid = (ys.len() - 1) as f64 / 2.0;
    let scale = mid.max(1.0);
    let t = |j: f64| (j - mid) / scale;
    let mut a = vec![vec![0.0; m + 1]; m];
    for (j, &y) in ys.iter().enumerate() {
        let tj = t(j as f64);
        let pows: Vec<f64> = (0..m).map(|k| tj.powi(k as i32)).collect();
        for r in 0..m {
            for c in 0..m {
                a[r][c] += pows[r] * pows[c];
            }
            a[r][m] += pows[r] * y;
        }
    }
    let coef = solve(a);
    let ta = t(at);
    coef.iter().enumerate().map(|(k, c)| c * ta.powi(k as i32)).sum()
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let m = a.len();
    for col in 0..m {
        let piv = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        for r in col + 1..m {
            let f = a[r][col] / a[col][col];
            for c in col..=m {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    let mut x = vec![0.0; m];
    for r in (0..m).rev() {
        let s: f64 = (r + 1..m).map(|c| a[r][c] * x[c]).sum();
        x[r] = (a[r][m] - s) / a[r][r];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_is_preserved() {
        let ys: Vec<f64> = (0..100).map(|i| {
            let x = i as f64 / 10.0;
            0.5 * x * x * x - 2.0 * x + 1.0
        }).collect();
        let s = savitzky_golay(&ys, 30, 3);
        for (a, b) in ys.iter().zip(&s) {
            assert!((a - b).abs() < 1e-6 * a.abs().max(1.0), "{a} {b}");
        }
    }

    #[test]
    fn reduces_alternating_noise() {
        let ys: Vec<f64> = (0..200).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let s = savitzky_golay(&ys, 30, 3);
        assert!(s[50..150].iter().all(|v| v.abs() < 0.2));
    }
}
