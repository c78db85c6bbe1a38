//! Seed derivation. Every randomized step draws from its own stream so
//! results never depend on execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer over `seed` and `stream`.
pub fn derive(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Per-client seed, `seed XOR client_id` pushed through the mixer.
pub fn client(seed: u64, client_id: usize) -> u64 {
    derive(seed ^ client_id as u64, 0xC11E)
}

// Stream tags used across the crate.
pub(crate) const PARTITION: u64 = 1;
pub(crate) const LOCAL_SPLIT: u64 = 2;
pub(crate) const TRAIN: u64 = 3;
pub(crate) const ATTACK: u64 = 4;
