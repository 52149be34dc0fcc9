//! SplitMix64, the generator behind every synthetic log.
//!
//! State is a single `u64`. Each draw adds the golden-ratio increment
//! `0x9E3779B97F4A7C15` (wrapping) to the state and returns
//!
//! ```text
//! z = state
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9   (wrapping)
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB   (wrapping)
//! z ^ (z >> 31)
//! ```
//!
//! Bounded draws use Lemire's multiply-shift with rejection: for bound `n`,
//! take `m = x * n` as a 128-bit product; reject while the low 64 bits are
//! below `(2^64 - n) mod n`; return the high 64 bits. The initial state is
//! the user-supplied seed.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform integer in `0..bound`. Panics if `bound == 0`.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let m = u128::from(self.next_u64()) * u128::from(bound);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    /// In-place Fisher-Yates shuffle, drawing from the last position down.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
