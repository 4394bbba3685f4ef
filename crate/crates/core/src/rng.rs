//! Counter-based random streams.
//!
//! A [`RngStream`] is the pair `(master seed, stream index)`. It is a plain value: cloning it
//! or sending it to another thread and asking for the same substream yields the same bytes.
//! Substreams use the ChaCha20 stream-id word, so `(seed, stream, substream)` addresses an
//! independent keystream.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngStream { seed, stream }
    }

    /// Generator for substream `sub` (e.g. the row index inside one sample).
    pub fn substream(&self, sub: u64) -> Substream {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.stream.to_le_bytes());
        let mut rng = ChaCha20Rng::from_seed(key);
        rng.set_stream(sub);
        Substream { rng }
    }
}

/// Sequential generator over one keystream.
#[derive(Clone, Debug)]
pub struct Substream {
    rng: ChaCha20Rng,
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal parameters are valid")
}

impl Substream {
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in the open interval (0, 1); one 64-bit draw.
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal by inverse CDF; exactly one uniform per variate.
    pub fn normal(&mut self) -> f64 {
        standard_normal().inverse_cdf(self.uniform())
    }

    pub fn normals(&mut self, k: usize) -> Vec<f64> {
        let dist = standard_normal();
        (0..k).map(|_| dist.inverse_cdf(self.uniform())).collect()
    }

    /// Uniform direction in `R^dim`.
    pub fn unit_vector(&mut self, dim: usize) -> Vec<f64> {
        loop {
            let mut v = self.normals(dim);
            let n = crate::linalg::norm(&v);
            if n > 1e-300 {
                v.iter_mut().for_each(|x| *x /= n);
                return v;
            }
        }
    }
}
