//! Seedable random stream with derived sub-streams.
//!
//! The generator is ChaCha8 keyed by a SplitMix64 expansion of a 64-bit seed.
//! Identical seeds give bitwise-identical draw sequences on every platform.
//! Sub-streams are fresh generators keyed from `(seed, index)`, so a batch of
//! simulation runs can be executed in any order (or concurrently) and still
//! reproduce exactly.
//!
//! Uniform doubles come from the top 53 bits of a 64-bit word. Normal draws
//! use the Marsaglia polar transform of two uniforms, one accepted value per
//! pair; the transform is fixed here rather than delegated to a distribution
//! crate so the draw sequence is pinned by this file alone.

use alloc::format;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::math;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic random stream; single-owner, not synchronized.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    /// Stream keyed by `seed`.
    pub fn new(seed: u64) -> RngStream {
        let mut state = seed;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        RngStream {
            seed,
            inner: ChaCha8Rng::from_seed(key),
        }
    }

    /// Derives an independent child seed from `(seed, index)`.
    ///
    /// For a fixed parent seed the mapping is injective in `index`, so
    /// distinct indices never collide.
    pub fn derive_seed(seed: u64, index: u64) -> u64 {
        let mut state = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
        splitmix64(&mut state)
    }

    /// Independent sub-stream `index`, derived from this stream's seed (not
    /// its current position), so derivation order does not matter.
    pub fn substream(&self, index: u64) -> RngStream {
        RngStream::new(Self::derive_seed(self.seed, index))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform draw in `[0, 1)` from the top 53 bits of one word.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        (self.next_u64() >> 11) as f64 * SCALE
    }

    /// Unbiased integer in `[0, bound)` by rejection.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "bound must be positive");
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let x = self.next_u64();
            if x >= threshold {
                return x % bound;
            }
        }
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.next_below(i as u64 + 1) as usize;
            xs.swap(i, j);
        }
    }

    /// `n` i.i.d. draws from `Uniform[lo, hi)`.
    pub fn sample_uniform(&mut self, lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Param(format!(
                "uniform range requires finite lo < hi, got [{lo}, {hi})"
            )));
        }
        let width = hi - lo;
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            // Rounding of lo + width*u can in principle land on hi; redraw.
            let v = loop {
                let v = lo + width * self.next_f64();
                if v < hi {
                    break v;
                }
            };
            out.push(v);
        }
        Ok(out)
    }

    /// `n` i.i.d. draws from `Normal(mean, std^2)`; `std` is the standard
    /// deviation. Marsaglia polar transform, one value per accepted pair.
    pub fn sample_normal(&mut self, mean: f64, std: f64, n: usize) -> Result<Vec<f64>> {
        if !(std > 0.0) || !std.is_finite() || !mean.is_finite() {
            return Err(Error::Param(format!(
                "normal requires finite mean and std > 0, got mean={mean}, std={std}"
            )));
        }
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let z = loop {
                let u = 2.0 * self.next_f64() - 1.0;
                let v = 2.0 * self.next_f64() - 1.0;
                let s = u * u + v * v;
                if s > 0.0 && s < 1.0 {
                    break u * math::sqrt(-2.0 * math::ln(s) / s);
                }
            };
            out.push(mean + std * z);
        }
        Ok(out)
    }
}
