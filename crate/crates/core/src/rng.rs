//! Portable random source for plan generation.
//!
//! Every randomized operation in this crate draws from [`PlanRng`], a thin
//! wrapper over the SplitMix64 generator (Steele, Lea & Flood). The state is
//! a single `u64` initialised to the user seed; each step adds
//! `0x9E3779B97F4A7C15` and mixes the result. Derived draws are fixed so that
//! a plan can be regenerated bit-for-bit in any language:
//!
//! * `next_f64`: `(next_u64 >> 11) * 2^-53`, uniform on `[0, 1)`.
//! * `below(n)`: Lemire's multiply-shift with rejection, unbiased on `[0, n)`.
//! * `shuffle`: Fisher-Yates from the last index down, `j = below(i + 1)`.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

#[derive(Debug, Clone)]
pub struct PlanRng {
    inner: SplitMix64,
}

impl PlanRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: SplitMix64::from_seed(seed.to_le_bytes()),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)`. `n` must be non-zero.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let mut m = (self.next_u64() as u128) * (n as u128);
        let mut low = m as u64;
        if low < n {
            let threshold = n.wrapping_neg() % n;
            while low < threshold {
                m = (self.next_u64() as u128) * (n as u128);
                low = m as u64;
            }
        }
        (m >> 64) as u64
    }

    pub fn index(&mut self, len: usize) -> usize {
        self.below(len as u64) as usize
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.index(i + 1);
            items.swap(i, j);
        }
    }

    pub(crate) fn as_rng_core(&mut self) -> &mut SplitMix64 {
        &mut self.inner
    }
}
