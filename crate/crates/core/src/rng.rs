//! Seed derivation. Every random stream in the crate is a ChaCha8 generator
//! keyed by a seed derived from the run seed and a fixed stream path, so
//! results never depend on iteration or thread order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const STREAM_SPLIT: u64 = 0x0053_504c_4954;
pub const STREAM_TRAIN_FEATURES: u64 = 0x0054_5241_494e;
pub const STREAM_TEST_FEATURES: u64 = 0x5445_5354;
pub const STREAM_INIT: u64 = 0x494e_4954;
pub const STREAM_SHUFFLE: u64 = 0x5348_5546;
pub const STREAM_GENERATOR: u64 = 0x0047_454e;
pub const STREAM_BALANCE: u64 = 0x0042_414c;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a base seed with a path of integers into a new seed.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(base), |acc, &part| splitmix64(acc ^ splitmix64(part)))
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn derived_rng(base: u64, path: &[u64]) -> ChaCha8Rng {
    seeded_rng(derive_seed(base, path))
}
