//! Deterministic pseudo-random number generation.
//!
//! Every stochastic choice in this crate (per-node memory strengths, shot
//! sampling) flows through the two primitives below so that a run is fully
//! reproducible from a single 64-bit master seed, across threads and across
//! implementations in other languages. The generator is xorshift64-star;
//! seeds are derived with splitmix64 so that nearby inputs (node 3 vs node 4,
//! leg 0 vs leg 1) produce unrelated streams.

/// splitmix64: mixes a 64-bit value into a well-distributed output.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// xorshift64-star generator. State must be nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct XorShift64Star {
    state: u64,
}

impl XorShift64Star {
    /// Creates a generator from a raw state word; zero is remapped to 1.
    pub fn from_state(state: u64) -> Self {
        Self {
            state: if state == 0 { 1 } else { state },
        }
    }

    /// Creates a generator seeded through splitmix64.
    pub fn seeded(seed: u64) -> Self {
        Self::from_state(splitmix64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(2685821657736338717)
    }

    /// Uniform draw from `[0, 1)` using the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[lo, hi]` (inclusive). Requires `lo <= hi`.
    pub fn next_in_range(&mut self, lo: u64, hi: u64) -> u64 {
        assert!(lo <= hi, "empty draw range [{lo}, {hi}]");
        let span = hi - lo + 1;
        lo + self.next_u64() % span
    }
}

/// Per-node generator state for memory-strength draws.
///
/// The state depends only on `(master seed, node index, leg index)`, so a
/// draw can be reproduced in isolation without replaying the whole decode.
pub fn node_rng(master_seed: u64, node: usize, leg: usize) -> XorShift64Star {
    let mix = master_seed
        ^ splitmix64(node as u64)
        ^ splitmix64((leg as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    XorShift64Star::from_state(splitmix64(mix))
}
