//! Deterministic stream derivation.
//!
//! Every random quantity in the crate flows from an explicit master seed.
//! Parallel work derives one independent ChaCha stream per (seed, index)
//! pair, so results do not depend on scheduling or worker count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// SplitMix64 finalizer; decorrelates nearby (seed, index) pairs.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent RNG stream derived from a master seed and a stream index.
pub fn stream(master: u64, index: u64) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    let mut state = master ^ mix(index.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(1));
    for chunk in key.chunks_mut(8) {
        state = mix(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}

/// Derives a sub-seed for a named component, for handing to [`stream`] again.
pub fn derive_seed(master: u64, salt: u64) -> u64 {
    mix(master ^ mix(salt))
}
