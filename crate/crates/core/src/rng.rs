//! Seed derivation.
//!
//! Every random stream is keyed by `(global seed, trial key, purpose, step)`.
//! Adding trials or changing the saccade budget never perturbs the streams of
//! existing trials, and serial and parallel runs draw identical numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a random stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Observation = 1,
    Decision = 2,
    NoisePrior = 3,
    Borji = 4,
    Synthetic = 5,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable 64-bit FNV-1a hash of a string key (trial or image id).
pub fn key_hash(key: &str) -> u64 {
    key.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

pub fn derive_seed(seed: u64, key: u64, purpose: Purpose, step: u64) -> u64 {
    let mut h = splitmix64(seed);
    h = splitmix64(h ^ key);
    h = splitmix64(h ^ purpose as u64);
    splitmix64(h ^ step)
}

pub fn stream(seed: u64, key: u64, purpose: Purpose, step: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, key, purpose, step))
}
