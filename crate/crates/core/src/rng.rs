//! Deterministic random streams.
//!
//! Every stream is a ChaCha12 generator whose 256-bit key is derived by
//! absorbing a domain tag and a list of 64-bit words through the SplitMix64
//! finalizer. Graph `i` of a family always gets the same stream no matter
//! which thread produces it or in which order graphs are generated.
//!
//! The derivation and the samplers built on top of the raw words are part of
//! the on-disk format: [`RNG_ALGORITHM`] is written into every manifest and
//! must change whenever any draw would change.

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

/// Identifier recorded in dataset manifests.
pub const RNG_ALGORITHM: &str = "chacha12+splitmix64-key/v1";

/// Domain tags keep streams for different purposes disjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Universe = 0x5500_0001,
    Graph = 0x5500_0002,
    Validation = 0x5500_0003,
    Splits = 0x5500_0004,
    Layout = 0x5500_0005,
    Sensitivity = 0x5500_0006,
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A seeded, reproducible source of randomness used by all samplers.
#[derive(Debug, Clone)]
pub struct DeterministicStream {
    inner: ChaCha12Rng,
}

impl DeterministicStream {
    /// Builds a stream keyed by `domain` and an arbitrary word list.
    pub fn from_words(domain: Domain, words: &[u64]) -> Self {
        let mut acc = splitmix64(domain as u64);
        for &w in words {
            acc = splitmix64(acc ^ splitmix64(w));
        }
        let mut seed = [0u8; 32];
        for (i, chunk) in seed.chunks_exact_mut(8).enumerate() {
            let word = splitmix64(acc.wrapping_add(i as u64 + 1));
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        Self {
            inner: ChaCha12Rng::from_seed(seed),
        }
    }

    pub fn for_universe(seed: u64) -> Self {
        Self::from_words(Domain::Universe, &[seed])
    }

    /// Independent stream for one graph of a family.
    pub fn for_graph(universe_seed: u64, family_seed: u64, graph_index: usize) -> Self {
        Self::from_words(
            Domain::Graph,
            &[universe_seed, family_seed, graph_index as u64],
        )
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[lo, hi)`; returns exactly `lo` when `lo == hi`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        let u = self.uniform();
        if lo == hi {
            lo
        } else {
            lo + u * (hi - lo)
        }
    }

    /// Unbiased integer in `0..bound` (Lemire's multiply-and-reject).
    pub fn index_below(&mut self, bound: usize) -> usize {
        assert!(bound > 0, "index_below requires a positive bound");
        let bound = bound as u64;
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let wide = (self.next_u64() as u128) * (bound as u128);
            if (wide as u64) >= threshold {
                return (wide >> 64) as usize;
            }
        }
    }

    /// Integer uniform over the closed range `[lo, hi]`.
    pub fn integer_in(&mut self, lo: usize, hi: usize) -> usize {
        lo + self.index_below(hi - lo + 1)
    }

    /// Standard normal draw via Box-Muller (one variate per two uniforms).
    pub fn standard_normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.index_below(i + 1);
            items.swap(i, j);
        }
    }
}
