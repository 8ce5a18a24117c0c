//! Seeded pseudo-random generator and seed mixing.
//!
//! The whole crate draws randomness from [`SplitMix64`], a 64-bit generator
//! with a fixed, documented update function. Independent streams (one SOM
//! per month, one k-means restart per index, one sweep candidate per k) are
//! derived with [`mix`], so every stage is a pure function of the master
//! seed plus a stage tag and an index, and runs reproduce bit-for-bit.

use alloc::vec::Vec;

/// Weyl increment used by the SplitMix64 state update.
pub const GAMMA: u64 = 0x9E3779B97F4A7C15;
/// First multiplier of the SplitMix64 output finalizer.
pub const MIX_MUL_1: u64 = 0xBF58476D1CE4E5B9;
/// Second multiplier of the SplitMix64 output finalizer.
pub const MIX_MUL_2: u64 = 0x94D049BB133111EB;

/// SplitMix64 output finalizer applied to `z + GAMMA`.
fn finalize(z: u64) -> u64 {
    let mut z = z.wrapping_add(GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(MIX_MUL_1);
    z = (z ^ (z >> 27)).wrapping_mul(MIX_MUL_2);
    z ^ (z >> 31)
}

/// Derives an independent seed from `(seed, salt)`.
///
/// Both inputs pass through the SplitMix64 finalizer, so nearby seeds and
/// salts (0, 1, 2, ...) still yield unrelated streams. The same `(seed,
/// salt)` pair always yields the same value.
pub fn mix(seed: u64, salt: u64) -> u64 {
    finalize(seed.wrapping_add(finalize(salt)))
}

/// SplitMix64 generator (Steele, Lea & Flood's public-domain design).
///
/// State advances by the Weyl constant [`GAMMA`]; outputs are the finalizer
/// of the new state. Simple, fast, and statistically solid, which is plenty
/// for sampling, shuffling, and noise here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    /// Creates a generator with the given seed. Equal seeds produce equal
    /// streams.
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Next raw 64-bit value.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(MIX_MUL_1);
        z = (z ^ (z >> 27)).wrapping_mul(MIX_MUL_2);
        z ^ (z >> 31)
    }

    /// Uniform integer in `[0, bound)` via 128-bit multiply-shift.
    ///
    /// The multiply-shift map is monotone in the raw draw and consumes
    /// exactly one `next_u64`, which keeps replaying streams simple. Panics
    /// if `bound` is zero.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "next_below requires a positive bound");
        (((self.next_u64() as u128) * (bound as u128)) >> 64) as u64
    }

    /// Uniform `f64` in `[0, 1)` from the top 53 bits of one draw.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }

    /// Uniform `f64` in `(0, 1]`, safe as a `log` argument.
    fn next_f64_open_low(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / 9007199254740992.0)
    }

    /// Standard normal draw via the Box-Muller transform.
    ///
    /// Consumes exactly two `next_u64` values per call; the cosine branch
    /// alone is used so the stream layout stays position-independent.
    pub fn next_gaussian(&mut self) -> f64 {
        let u = self.next_f64_open_low();
        let v = self.next_f64();
        libm::sqrt(-2.0 * libm::log(u)) * libm::cos(2.0 * core::f64::consts::PI * v)
    }

    /// In-place Fisher-Yates shuffle, iterating from the last index down.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_below((i + 1) as u64) as usize;
            items.swap(i, j);
        }
    }

    /// Shuffled vector of the indices `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut indices: Vec<usize> = (0..n).collect();
        self.shuffle(&mut indices);
        indices
    }
}
