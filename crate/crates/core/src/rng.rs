//! Seed derivation. Every random stream is a ChaCha8 generator keyed by a
//! 64-bit seed; child seeds are derived by index so replicate `j` of a run
//! is reproducible regardless of execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th child stream of `parent`.
pub fn child_seed(parent: u64, index: u64) -> u64 {
    splitmix64(splitmix64(parent) ^ splitmix64(index.wrapping_add(0xA076_1D64_78BD_642F)))
}
