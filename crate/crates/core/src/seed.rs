//! Seed derivation helpers.
//!
//! Every random stream in the crate is derived from a master seed and a
//! stable identifier (tree index, subset, row), never from scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Combines two values into a new, well-mixed seed.
pub fn mix(seed: u64, value: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ value.rotate_left(17) ^ 0x5851_F42D_4C95_7F2D)
}

/// Seed for a stream keyed by a list of indices.
pub fn mix_indices(seed: u64, indices: &[usize]) -> u64 {
    let mut acc = mix(seed, indices.len() as u64);
    for &i in indices {
        acc = mix(acc, i as u64);
    }
    acc
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
