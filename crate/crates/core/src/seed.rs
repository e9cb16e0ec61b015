//! Seed derivation tree.
//!
//! All randomness descends from one base seed. A child seed is obtained by
//! folding a path of integer labels through SplitMix64, e.g.
//! `derive(base, &[stream::ENSEMBLE, member, stream::FORCING, mode])`.
//! Each derived seed initializes an independent ChaCha8 generator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Labels for the first branching level of the derivation tree.
pub mod stream {
    pub const JUMPS: u64 = 1;
    pub const FBM: u64 = 2;
    pub const ENSEMBLE: u64 = 3;
    pub const FORCING: u64 = 4;
    pub const BOOTSTRAP: u64 = 5;
    pub const PATH: u64 = 6;
    pub const PROBE: u64 = 7;
    pub const PROJECTION: u64 = 8;
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive(base: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(base), |acc, &label| splitmix64(acc ^ splitmix64(label.wrapping_add(0xA5A5))))
}

pub fn rng(base: u64, path: &[u64]) -> Rng {
    ChaCha8Rng::seed_from_u64(derive(base, path))
}
