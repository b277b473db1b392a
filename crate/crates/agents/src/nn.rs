//! Dense and GRU layers over a flat parameter vector, with hand-written
//! backward passes. Weights are row-major `[out][in]`.

use pomem_core::RngStream;

/// Offsets of a dense layer `y = W x + b` inside the flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dense {
    pub w: usize,
    pub b: usize,
    pub din: usize,
    pub dout: usize,
}

impl Dense {
    pub fn alloc(offset: &mut usize, din: usize, dout: usize) -> Self {
        let w = *offset;
        let b = w + din * dout;
        *offset = b + dout;
        Self { w, b, din, dout }
    }

    pub fn num_params(&self) -> usize {
        self.din * self.dout + self.dout
    }

    pub fn forward(&self, p: &[f64], x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.din);
        debug_assert_eq!(y.len(), self.dout);
        let w = &p[self.w..self.w + self.din * self.dout];
        let b = &p[self.b..self.b + self.dout];
        for (o, yo) in y.iter_mut().enumerate() {
            let row = &w[o * self.din..(o + 1) * self.din];
            *yo = b[o] + dot(row, x);
        }
    }

    /// Accumulate parameter gradients and, if asked, write `dL/dx`.
    pub fn backward(&self, p: &[f64], g: &mut [f64], x: &[f64], dy: &[f64], dx: Option<&mut [f64]>) {
        {
            let gw = &mut g[self.w..self.w + self.din * self.dout];
            for (o, &d) in dy.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let row = &mut gw[o * self.din..(o + 1) * self.din];
                for (gi, &xi) in row.iter_mut().zip(x) {
                    *gi += d * xi;
                }
            }
        }
        for (gb, &d) in g[self.b..self.b + self.dout].iter_mut().zip(dy) {
            *gb += d;
        }
        if let Some(dx) = dx {
            dx.fill(0.0);
            let w = &p[self.w..self.w + self.din * self.dout];
            for (o, &d) in dy.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let row = &w[o * self.din..(o + 1) * self.din];
                for (dxi, &wi) in dx.iter_mut().zip(row) {
                    *dxi += d * wi;
                }
            }
        }
    }

    pub fn init(&self, p: &mut [f64], gain: f64, rng: &mut RngStream) {
        let w = orthogonal(self.dout, self.din, gain, rng);
        p[self.w..self.w + w.len()].copy_from_slice(&w);
        p[self.b..self.b + self.dout].fill(0.0);
    }
}

/// Gated recurrent unit with gates ordered (reset, update, candidate):
///
/// ```text
/// r  = sigmoid(W_ir x + b_ir + W_hr h + b_hr)
/// z  = sigmoid(W_iz x + b_iz + W_hz h + b_hz)
/// n  = tanh(W_in x + b_in + r * (W_hn h + b_hn))
/// h' = (1 - z) * n + z * h
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gru {
    pub input: Dense,
    pub hidden: Dense,
    pub din: usize,
    pub h: usize,
}

/// Per-step values the GRU backward pass needs.
#[derive(Debug, Clone, Default)]
pub struct GruCache {
    pub r: Vec<f64>,
    pub z: Vec<f64>,
    pub n: Vec<f64>,
    /// `W_hn h + b_hn`
    pub hn: Vec<f64>,
}

impl GruCache {
    pub fn new(h: usize) -> Self {
        Self {
            r: vec![0.0; h],
            z: vec![0.0; h],
            n: vec![0.0; h],
            hn: vec![0.0; h],
        }
    }
}

impl Gru {
    pub fn alloc(offset: &mut usize, din: usize, h: usize) -> Self {
        let input = Dense::alloc(offset, din, 3 * h);
        let hidden = Dense::alloc(offset, h, 3 * h);
        Self { input, hidden, din, h }
    }

    pub fn num_params(&self) -> usize {
        self.input.num_params() + self.hidden.num_params()
    }

    pub fn init(&self, p: &mut [f64], rng: &mut RngStream) {
        let h = self.h;
        for (layer, din) in [(self.input, self.din), (self.hidden, h)] {
            for gate in 0..3 {
                let w = orthogonal(h, din, 1.0, rng);
                let start = layer.w + gate * h * din;
                p[start..start + h * din].copy_from_slice(&w);
            }
            p[layer.b..layer.b + 3 * h].fill(0.0);
        }
    }

    /// One step. `scratch` must hold `6 * h` values.
    pub fn forward(&self, p: &[f64], x: &[f64], h_prev: &[f64], h_out: &mut [f64], cache: &mut GruCache, scratch: &mut [f64]) {
        let h = self.h;
        let (gi, gh) = scratch[..6 * h].split_at_mut(3 * h);
        self.input.forward(p, x, gi);
        self.hidden.forward(p, h_prev, gh);
        for j in 0..h {
            let r = sigmoid(gi[j] + gh[j]);
            let z = sigmoid(gi[h + j] + gh[h + j]);
            let hn = gh[2 * h + j];
            let n = (gi[2 * h + j] + r * hn).tanh();
            cache.r[j] = r;
            cache.z[j] = z;
            cache.n[j] = n;
            cache.hn[j] = hn;
            h_out[j] = (1.0 - z) * n + z * h_prev[j];
        }
    }

    /// Backward through one step given `dL/dh'`. Accumulates parameter
    /// gradients, writes `dL/dx` and `dL/dh_prev`. `scratch` holds `6 * h`.
    #[allow(clippy::too_many_arguments)]
    pub fn backward(
        &self,
        p: &[f64],
        g: &mut [f64],
        x: &[f64],
        h_prev: &[f64],
        cache: &GruCache,
        dh: &[f64],
        dx: &mut [f64],
        dh_prev: &mut [f64],
        scratch: &mut [f64],
    ) {
        let h = self.h;
        let (dgi, dgh) = scratch[..6 * h].split_at_mut(3 * h);
        for j in 0..h {
            let (r, z, n, hn) = (cache.r[j], cache.z[j], cache.n[j], cache.hn[j]);
            let d = dh[j];
            let dn = d * (1.0 - z);
            let dz = d * (h_prev[j] - n);
            let dn_pre = dn * (1.0 - n * n);
            let dr = dn_pre * hn;
            let dr_pre = dr * r * (1.0 - r);
            let dz_pre = dz * z * (1.0 - z);
            dgi[j] = dr_pre;
            dgi[h + j] = dz_pre;
            dgi[2 * h + j] = dn_pre;
            dgh[j] = dr_pre;
            dgh[h + j] = dz_pre;
            dgh[2 * h + j] = dn_pre * r;
        }
        self.input.backward(p, g, x, dgi, Some(dx));
        self.hidden.backward(p, g, h_prev, dgh, Some(dh_prev));
        for j in 0..h {
            dh_prev[j] += dh[j] * cache.z[j];
        }
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Row-major `rows × cols` matrix with orthonormal rows or columns (whichever
/// is fewer), scaled by `gain`.
pub fn orthogonal(rows: usize, cols: usize, gain: f64, rng: &mut RngStream) -> Vec<f64> {
    let (tall, short) = (rows.max(cols), rows.min(cols));
    // `short` column vectors of length `tall`.
    let mut q: Vec<Vec<f64>> = (0..short)
        .map(|_| (0..tall).map(|_| rng.normal()).collect())
        .collect();
    for i in 0..short {
        for j in 0..i {
            let proj = dot(&q[i], &q[j]);
            let (head, tail) = q.split_at_mut(i);
            for (a, b) in tail[0].iter_mut().zip(&head[j]) {
                *a -= proj * b;
            }
        }
        let norm = dot(&q[i], &q[i]).sqrt().max(1e-12);
        for a in q[i].iter_mut() {
            *a /= norm;
        }
    }
    let mut out = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            out[r * cols + c] = gain * if rows >= cols { q[c][r] } else { q[r][c] };
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthogonal_rows_or_cols() {
        let mut rng = RngStream::new(0, 0);
        for (r, c) in [(5, 3), (3, 5), (4, 4)] {
            let m = orthogonal(r, c, 2.0, &mut rng);
            let k = r.min(c);
            for i in 0..k {
                for j in 0..k {
                    let v: f64 = if r >= c {
                        (0..r).map(|t| m[t * c + i] * m[t * c + j]).sum()
                    } else {
                        (0..c).map(|t| m[i * c + t] * m[j * c + t]).sum()
                    };
                    let expect = if i == j { 4.0 } else { 0.0 };
                    assert!((v - expect).abs() < 1e-9);
                }
            }
        }
    }

    fn gru_fixture(zero: bool) -> (Gru, Vec<f64>) {
        let mut off = 0;
        let g = Gru::alloc(&mut off, 3, 4);
        let mut p = vec![0.0; off];
        if !zero {
            let mut rng = RngStream::new(1, 0);
            for v in p.iter_mut() {
                *v = rng.normal() * 0.7;
            }
        }
        (g, p)
    }

    #[test]
    fn zero_gru_keeps_zero_state() {
        let (g, p) = gru_fixture(true);
        let mut cache = GruCache::new(4);
        let mut h = vec![1.0; 4];
        let mut scratch = vec![0.0; 24];
        g.forward(&p, &[0.0; 3], &[0.0; 4], &mut h, &mut cache, &mut scratch);
        assert_eq!(h, vec![0.0; 4]);
        assert!(cache.z.iter().all(|&z| z == 0.5));
    }

    #[test]
    fn saturated_update_gate_copies_state() {
        let (g, mut p) = gru_fixture(false);
        let b = g.input.b + 4;
        p[b..b + 4].fill(50.0);
        let mut cache = GruCache::new(4);
        let mut h = vec![0.0; 4];
        let mut scratch = vec![0.0; 24];
        g.forward(&p, &[0.3, -1.0, 2.0], &[0.0; 4], &mut h, &mut cache, &mut scratch);
        assert!(h.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn random_gru_state_in_unit_interval() {
        let (g, p) = gru_fixture(false);
        let mut cache = GruCache::new(4);
        let mut rng = RngStream::new(2, 0);
        let mut h = vec![0.0; 4];
        let mut scratch = vec![0.0; 24];
        for _ in 0..50 {
            let x: Vec<f64> = (0..3).map(|_| rng.normal() * 5.0).collect();
            let prev = h.clone();
            g.forward(&p, &x, &prev, &mut h, &mut cache, &mut scratch);
            assert!(h.iter().all(|v| v.abs() < 1.0));
        }
    }

    #[test]
    fn gru_backward_matches_finite_differences() {
        let (g, p) = gru_fixture(false);
        let x = [0.5, -0.2, 0.9];
        let hp = [0.1, -0.4, 0.3, 0.2];
        let w = [0.3, -1.1, 0.8, 0.5];
        let loss = |p: &[f64], x: &[f64], hp: &[f64]| {
            let mut cache = GruCache::new(4);
            let mut h = vec![0.0; 4];
            let mut scratch = vec![0.0; 24];
            g.forward(p, x, hp, &mut h, &mut cache, &mut scratch);
            dot(&h, &w)
        };
        let mut cache = GruCache::new(4);
        let mut h = vec![0.0; 4];
        let mut scratch = vec![0.0; 24];
        g.forward(&p, &x, &hp, &mut h, &mut cache, &mut scratch);
        let mut grad = vec![0.0; p.len()];
        let mut dx = vec![0.0; 3];
        let mut dhp = vec![0.0; 4];
        g.backward(&p, &mut grad, &x, &hp, &cache, &w, &mut dx, &mut dhp, &mut scratch);
        let eps = 1e-6;
        for i in 0..p.len() {
            let mut a = p.clone();
            a[i] += eps;
            let mut b = p.clone();
            b[i] -= eps;
            let fd = (loss(&a, &x, &hp) - loss(&b, &x, &hp)) / (2.0 * eps);
            assert!((fd - grad[i]).abs() < 1e-7, "param {i}: {fd} vs {}", grad[i]);
        }
        for i in 0..4 {
            let mut a = hp;
            a[i] += eps;
            let mut b = hp;
            b[i] -= eps;
            let fd = (loss(&p, &x, &a) - loss(&p, &x, &b)) / (2.0 * eps);
            assert!((fd - dhp[i]).abs() < 1e-7);
        }
        for i in 0..3 {
            let mut a = x;
            a[i] += eps;
            let mut b = x;
            b[i] -= eps;
            let fd = (loss(&p, &a, &hp) - loss(&p, &b, &hp)) / (2.0 * eps);
            assert!((fd - dx[i]).abs() < 1e-7);
        }
    }
}
