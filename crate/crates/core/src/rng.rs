//! Seed derivation.
//!
//! Every random stream in a run is a `ChaCha8Rng` seeded from the master seed
//! plus a fixed tag path, so streams are independent of scheduling order and
//! stable across platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags. Values are part of the reproducibility contract.
pub mod tag {
    pub const INIT_WEIGHTS: u64 = 1;
    pub const INIT_MASK: u64 = 2;
    pub const DATA: u64 = 3;
    pub const SPLIT: u64 = 4;
    pub const PARTITION: u64 = 5;
    pub const CLIENT_SAMPLING: u64 = 6;
    pub const CLIENT_TRAIN: u64 = 7;
    pub const ADJUST: u64 = 8;
    pub const BANDIT_ENV: u64 = 9;
    pub const BANDIT_POLICY: u64 = 10;
    pub const BANDIT_OUTCOMES: u64 = 11;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed with a path of tags into a child seed.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

/// Seeded generator for the stream identified by `path`.
pub fn stream(master: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, path))
}
