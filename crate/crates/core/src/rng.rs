//! Counter-based, splittable random streams.
//!
//! Every stream is a ChaCha8 keystream keyed by the 64-bit master seed and
//! selected by a 64-bit stream id. The position inside the keystream is the
//! counter, so `(seed, stream_id, counter)` fully determines the next draw on
//! every platform. Distinct stream ids never overlap.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// A single deterministic random stream.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl PartialEq for RngStream {
    fn eq(&self, other: &Self) -> bool {
        self.seed == other.seed
            && self.stream_id == other.stream_id
            && self.inner.get_word_pos() == other.inner.get_word_pos()
    }
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        // Fixed nonzero tail so seed 0 still yields a well-mixed key.
        key[8..16].copy_from_slice(&0x9E37_79B9_7F4A_7C15u64.to_le_bytes());
        let mut inner = ChaCha8Rng::from_seed(key);
        inner.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            inner,
        }
    }

    /// Reposition to an absolute counter value (in 32-bit words).
    pub fn at_counter(seed: u64, stream_id: u64, counter: u64) -> Self {
        let mut s = Self::new(seed, stream_id);
        s.inner.set_word_pos(counter as u128);
        s
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Number of 32-bit words consumed so far.
    pub fn counter(&self) -> u64 {
        self.inner.get_word_pos() as u64
    }

    /// Derive an independent child seed from this stream's identity and a tag.
    ///
    /// Children are keyed on `(seed, stream_id, tag)` and do not consume
    /// draws from the parent.
    pub fn split(&self, tag: u64) -> RngStream {
        RngStream::new(derive_seed(self.seed, self.stream_id ^ tag.rotate_left(32)), tag)
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    #[inline]
    pub fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)`. Unbiased (Lemire's widening multiply with
    /// rejection). Panics if `n == 0`.
    #[inline]
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        let n = n as u64;
        loop {
            let x = self.next_u64();
            let m = (x as u128) * (n as u128);
            let low = m as u64;
            if low >= n || low >= n.wrapping_neg() % n {
                return (m >> 64) as usize;
            }
        }
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Standard normal draw (Box-Muller, one value per call).
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.below(i + 1);
            xs.swap(i, j);
        }
    }

    /// `k` distinct indices from `[0, n)` in draw order.
    pub fn sample_distinct(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below(n - i);
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}

/// SplitMix64 finalizer over a pair, used to derive sub-seeds.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed
        .wrapping_add(tag.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x6A09_E667_F3BC_C909);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash a string tag into a 64-bit stream selector (FNV-1a).
pub fn tag_id(tag: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}
