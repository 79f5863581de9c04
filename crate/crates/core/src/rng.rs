//! Deterministic random streams.
//!
//! All randomness goes through ChaCha8 (`rand_chacha`), seeded from a `u64`
//! with `SeedableRng::seed_from_u64`. Independent streams derived from one
//! seed use ChaCha's 64-bit stream id, so a DoS generator, a disturbance
//! source and a noise source sharing a seed never overlap. ChaCha output is
//! specified bit-for-bit, so streams are identical across platforms.
//!
//! Uniform reals are built from the top 53 bits of each `u64` draw.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

#[derive(Debug, Clone)]
pub struct Stream {
    inner: ChaCha8Rng,
}

/// Stream ids in use across the crate.
pub mod ids {
    pub const DOS: u64 = 0;
    pub const DISTURBANCE: u64 = 1;
    pub const MEASUREMENT_NOISE: u64 = 2;
}

impl Stream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }

    /// Uniform on `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[lo, hi)`; returns `lo` when `lo == hi`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
}
