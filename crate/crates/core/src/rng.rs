//! The one random source used throughout the crate.
//!
//! Streams are ChaCha20 (`rand_chacha::ChaCha20Rng`) seeded through
//! `SeedableRng::seed_from_u64`. Derived quantities are computed with the
//! portable rules below so another implementation holding a ChaCha20
//! stream can reproduce every draw:
//!
//! - uniform `[0, 1)`: top 53 bits of `next_u64`, times 2⁻⁵³;
//! - index below `n`: rejection sampling on `next_u64` against the largest
//!   multiple of `n`, then `x % n`;
//! - standard normals: Box–Muller on two uniforms, `u1` mapped to `(0, 1]`,
//!   emitting the cosine variate first and the sine variate second.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub type Stream = ChaCha20Rng;

pub fn stream(seed: u64) -> Stream {
    ChaCha20Rng::seed_from_u64(seed)
}

#[inline]
pub fn uniform(rng: &mut Stream) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform integer in `0..n`. `n` must be positive.
pub fn index_below(rng: &mut Stream, n: usize) -> usize {
    debug_assert!(n > 0);
    let n = n as u64;
    let zone = u64::MAX - (u64::MAX % n + 1) % n;
    loop {
        let x = rng.next_u64();
        if x <= zone {
            return (x % n) as usize;
        }
    }
}

/// Box–Muller normal generator that caches the second variate.
#[derive(Debug, Clone)]
pub struct Normals {
    rng: Stream,
    spare: Option<f64>,
}

impl Normals {
    pub fn new(seed: u64) -> Self {
        Self { rng: stream(seed), spare: None }
    }

    pub fn sample(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - uniform(&mut self.rng);
        let u2 = uniform(&mut self.rng);
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let theta = 2.0 * core::f64::consts::PI * u2;
        self.spare = Some(r * libm::sin(theta));
        r * libm::cos(theta)
    }
}
