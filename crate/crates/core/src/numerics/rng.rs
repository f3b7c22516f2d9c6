use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Matrix;

/// Well-known stream ids, so independent consumers of one seed never share draws.
pub mod streams {
    pub const INIT: u64 = 1;
    pub const EPOCH_SHUFFLE: u64 = 2;
    pub const DATA_LABELS: u64 = 3;
    pub const DATA_SPLIT: u64 = 4;
    pub const LABEL_SHUFFLE: u64 = 5;
    pub const SUBSET: u64 = 6;
}

/// Seeded, counter-based random stream (ChaCha8).
///
/// A `(seed, stream)` pair fixes the whole draw sequence on every platform,
/// independent of what other streams have been consumed.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { seed, inner }
    }

    /// Stream `index` within a domain, e.g. the shuffle for one epoch.
    pub fn substream(seed: u64, domain: u64, index: u64) -> Self {
        Self::with_stream(seed, (domain << 40) | (index & ((1 << 40) - 1)))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform on `[lo, hi]` (the upper end is reachable only through rounding).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        items.shuffle(&mut self.inner);
    }

    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        self.shuffle(&mut p);
        p
    }
}

/// Glorot-uniform weights of shape `fan_in × fan_out`.
///
/// # Panics
/// If either fan is zero.
pub fn glorot_init(rng: &mut RngStream, fan_in: usize, fan_out: usize) -> Matrix {
    assert!(fan_in >= 1 && fan_out >= 1, "fans must be positive");
    let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let data = (0..fan_in * fan_out)
        .map(|_| rng.uniform(-bound, bound))
        .collect();
    Matrix::new(fan_in, fan_out, data).expect("shape is consistent")
}
