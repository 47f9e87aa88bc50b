//! Deterministic RNG stream derivation.
//!
//! Experiments derive one independent ChaCha stream per (trial, purpose)
//! from a single master seed, so trial `k` never consumes state that another
//! trial depends on: dropping or reordering trials cannot change the others.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; full-period bijective mixer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hashes a master seed and a path of indices into a single derived seed.
pub fn derive(master: u64, path: &[u64]) -> u64 {
    let mut state = mix(master);
    for &part in path {
        state = mix(state ^ mix(part));
    }
    state
}

/// An independent, reproducible RNG for the given derivation path.
pub fn rng(master: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(master, path))
}
