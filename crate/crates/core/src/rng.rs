//! Seedable, splittable random streams.
//!
//! Every stochastic draw in the crate goes through a [`StreamRng`], a ChaCha8
//! counter-based generator keyed by `(seed, stream)`. Distinct streams under the
//! same seed are independent, and the output is identical on every platform.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone)]
pub struct StreamRng {
    inner: ChaCha8Rng,
    seed: u64,
    stream: u64,
}

impl StreamRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self {
            inner,
            seed,
            stream,
        }
    }

    pub fn from_seed(seed: u64) -> Self {
        Self::new(seed, 0)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Derives an independent child stream keyed by `label`.
    ///
    /// The child depends only on `(seed, stream, label)`, never on how much of
    /// the parent has been consumed.
    pub fn split(&self, label: u64) -> StreamRng {
        StreamRng::new(self.seed, mix(self.stream, label))
    }

    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    pub fn fill_normal(&mut self, out: &mut [f64]) {
        for v in out.iter_mut() {
            *v = self.normal();
        }
    }

    /// A uniformly distributed unit vector of dimension `d`.
    pub fn unit_vector(&mut self, d: usize) -> Vec<f64> {
        loop {
            let mut v = vec![0.0; d];
            self.fill_normal(&mut v);
            let n = crate::linalg::norm(&v);
            if n > 1e-300 {
                v.iter_mut().for_each(|x| *x /= n);
                return v;
            }
        }
    }
}

impl RngCore for StreamRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// SplitMix64 finalizer over a pair, used to derive stream ids.
pub fn mix(a: u64, b: u64) -> u64 {
    let mut z = a
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(b)
        .wrapping_add(0x632B_E59B_D9B4_E019);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
