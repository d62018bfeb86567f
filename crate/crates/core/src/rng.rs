//! Seeded pseudo-randomness for the crate's two randomized procedures:
//! cross-validation fold assignment and Monte Carlo significance sampling.
//!
//! This is Steele, Lea & Flood's SplitMix64, written out here rather than
//! pulled from a crate so that seeded results are reproducible byte-for-byte
//! across platforms and dependency upgrades — the generator's output sequence
//! is part of this crate's observable behaviour.
//!
//! Not cryptographic; never use for anything security-relevant.

/// SplitMix64 generator. Copy-cheap; the entire state is one `u64`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    /// Creates a generator from a seed. Equal seeds give equal sequences.
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Next 64 uniformly distributed bits.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw from `[0, 1)` using the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw from `0..bound` without modulo bias (rejection sampling).
    ///
    /// # Panics
    ///
    /// Panics if `bound` is zero.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "next_below requires a positive bound");
        // Reject draws from the short final partial cycle of u64 % bound.
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let r = self.next_u64();
            if r >= threshold {
                return r % bound;
            }
        }
    }

    /// Unbiased coin flip.
    pub fn next_bool(&mut self) -> bool {
        // The high bit; low bits of SplitMix64 are fine too, but this reads
        // the same draw as next_f64 < 0.5 would.
        self.next_u64() >> 63 == 1
    }

    /// Fisher–Yates shuffle driven by this generator.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.next_below(i as u64 + 1) as usize;
            xs.swap(i, j);
        }
    }
}
