//! Deterministic, independently addressable random streams.
//!
//! Every stream is a ChaCha8 keystream: the 256-bit key is expanded from the
//! master seed with SplitMix64 and the stream id selects the ChaCha stream
//! word, so stream `k` of seed `s` needs no coordination with any other
//! stream. Exponentials use the inverse transform so the output depends only
//! on the uniform draws and `ln`.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RngError {
    #[error("exponential mean must be positive and finite, got {0}")]
    BadMean(f64),
}

/// Seed and stream id a stream was derived from.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct Lineage {
    pub master_seed: u64,
    pub stream_id: u64,
}

#[derive(Clone, Debug)]
pub struct RngStream {
    inner: ChaCha8Rng,
    lineage: Lineage,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The stream addressed by `(master_seed, stream_id)`.
pub fn derive_stream(master_seed: u64, stream_id: u64) -> RngStream {
    let mut sm = master_seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut sm).to_le_bytes());
    }
    let mut inner = ChaCha8Rng::from_seed(key);
    inner.set_stream(stream_id);
    RngStream {
        inner,
        lineage: Lineage {
            master_seed,
            stream_id,
        },
    }
}

const TWO_POW_NEG_52: f64 = 1.0 / (1u64 << 52) as f64;

impl RngStream {
    pub fn lineage(&self) -> Lineage {
        self.lineage
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on the open interval (0, 1): midpoints of a 2^-52 grid, all
    /// exactly representable (a 2^-53 grid would round its top point to 1).
    #[inline]
    pub fn uniform01(&mut self) -> f64 {
        ((self.inner.next_u64() >> 12) as f64 + 0.5) * TWO_POW_NEG_52
    }

    /// Uniform index in `0..n`; `n` must be positive.
    #[inline]
    pub fn index(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    /// Exp(1) draw.
    #[inline]
    pub fn exp1(&mut self) -> f64 {
        -self.uniform01().ln()
    }

    /// Exponential with the given mean.
    pub fn exponential(&mut self, mean: f64) -> Result<f64, RngError> {
        if !(mean > 0.0 && mean.is_finite()) {
            return Err(RngError::BadMean(mean));
        }
        Ok(mean * self.exp1())
    }
}

pub fn sample_uniform01(r: &mut RngStream) -> f64 {
    r.uniform01()
}

pub fn sample_exponential(r: &mut RngStream, mean: f64) -> Result<f64, RngError> {
    r.exponential(mean)
}
