//! Deterministic random number generation.
//!
//! A SplitMix64 stream keeps every draw reproducible from a single `u64`
//! seed with no platform or dependency-version drift. Independent streams
//! are derived by mixing tag words into the seed, which lets e.g. each
//! region of a dataset own its own stream so generation order never
//! matters.

use crate::error::{Error, Result};

/// Mixes a tag into a seed, producing the seed of a derived stream.
pub fn mix(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// SplitMix64 generator.
#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng { state: seed }
    }

    /// Stream derived from `seed` by folding in each tag in order.
    pub fn stream(seed: u64, tags: &[u64]) -> Self {
        let mut s = seed;
        for &t in tags {
            s = mix(s, t);
        }
        Rng::new(s)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal via Box-Muller. Two uniforms are consumed per draw.
    pub fn normal(&mut self) -> f64 {
        // u1 in (0, 1] so the log is finite.
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Unbiased index in [0, n) by rejection.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index range must be nonempty");
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let x = self.next_u64();
            if x < zone {
                return (x % n) as usize;
            }
        }
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.index(i + 1);
            items.swap(i, j);
        }
    }

    /// Seeded permutation of 0..n.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        self.shuffle(&mut p);
        p
    }

    /// Fixed-point-free permutation of 0..n, by resampling. Requires n >= 2.
    pub fn derangement(&mut self, n: usize) -> Result<Vec<usize>> {
        if n < 2 {
            return Err(Error::Input(format!(
                "derangement requires n >= 2, got {n}"
            )));
        }
        loop {
            let p = self.permutation(n);
            if p.iter().enumerate().all(|(i, &pi)| i != pi) {
                return Ok(p);
            }
        }
    }

    /// Poisson draw by Knuth's method; adequate for the modest rates the
    /// synthetic generator produces.
    pub fn poisson(&mut self, rate: f64) -> u64 {
        assert!(
            rate.is_finite() && rate >= 0.0,
            "rate must be finite and >= 0"
        );
        if rate == 0.0 {
            return 0;
        }
        let threshold = (-rate).exp();
        let mut k = 0u64;
        let mut p = 1.0;
        loop {
            p *= self.uniform();
            if p <= threshold {
                return k;
            }
            k += 1;
        }
    }
}
