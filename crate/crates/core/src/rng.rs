//! Seedable random source with a published draw contract.
//!
//! Every random quantity in this crate is derived from [`RngStream::next_unit`],
//! one call of which is "one draw". A draw takes the next `u64` from a ChaCha8
//! generator seeded with [`SeedableRng::seed_from_u64`], keeps the top 53 bits
//! and scales them by `2^-53`, giving a value in `[0, 1)`:
//!
//! ```text
//! u = (next_u64() >> 11) * 2^-53
//! ```
//!
//! Derived quantities:
//!
//! | operation            | draws | value                              |
//! |----------------------|-------|------------------------------------|
//! | `sample_uniform(a,b)`| 1     | `a + (b - a) * u`, kept below `b`  |
//! | `sample_beta11`      | 1     | `sample_uniform(0, 1)`             |
//! | `bernoulli(p)`       | 1     | `u < p`                            |
//! | `sample_index(n)`    | 1     | `floor(u * n)`                     |
//!
//! Child streams for parallel work reuse the parent seed on a different
//! ChaCha stream id (`index + 1`), so they never overlap the parent.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::{Error, Result};

const UNIT_SCALE: f64 = 1.0 / (1u64 << 53) as f64;

/// Deterministic random stream. Single owner; clone it to fork an identical copy.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    draws: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            stream: 0,
            draws: 0,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream number `index` derived from `seed`.
    pub fn child(seed: u64, index: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        let stream = index.wrapping_add(1);
        inner.set_stream(stream);
        Self {
            seed,
            stream,
            draws: 0,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Number of draws consumed so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    /// One draw, uniform on `[0, 1)` with 53 bits of resolution.
    pub fn next_unit(&mut self) -> f64 {
        self.draws += 1;
        (self.inner.next_u64() >> 11) as f64 * UNIT_SCALE
    }

    /// Uniform on `[lo, hi)`; `lo == hi` returns `lo`. Always one draw.
    pub fn sample_uniform(&mut self, lo: f64, hi: f64) -> Result<f64> {
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(Error::InvalidRange { lo, hi });
        }
        let u = self.next_unit();
        if lo == hi {
            return Ok(lo);
        }
        let v = lo + (hi - lo) * u;
        Ok(if v >= hi { hi.next_down() } else { v })
    }

    /// Beta(1, 1) is the uniform law on `[0, 1)`; this is `sample_uniform(0, 1)`.
    pub fn sample_beta11(&mut self) -> f64 {
        self.next_unit()
    }

    /// `true` with probability `p`. One draw, even for `p` of 0 or 1.
    pub fn bernoulli(&mut self, p: f64) -> Result<bool> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability(p));
        }
        Ok(self.next_unit() < p)
    }

    /// Uniform index in `0..n`. One draw. `n` must be at least 1.
    pub fn sample_index(&mut self, n: usize) -> usize {
        debug_assert!(n >= 1);
        let u = self.next_unit();
        let i = libm::floor(u * n as f64) as usize;
        i.min(n.saturating_sub(1))
    }
}
