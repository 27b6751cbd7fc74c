//! Seed derivation and reproducible generators.
//!
//! Every randomized routine in the crate takes an explicit 64-bit seed; there
//! is no hidden global RNG. Independent sub-streams (per field draw, per Monte
//! Carlo shard) are derived with a splitmix-style mixer so that nodes of the
//! distributed protocol can reconstruct draw `i` from `(seed, i)` alone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive the seed of sub-stream `index` from a session seed.
#[inline]
pub fn substream_seed(seed: u64, index: u64) -> u64 {
    mix64(seed ^ mix64(index.wrapping_add(0xa076_1d64_78bd_642f)))
}

/// Seeded generator used throughout the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
