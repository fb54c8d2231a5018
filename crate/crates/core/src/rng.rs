//! Seed derivation. Every randomized routine takes an explicit seed and derives
//! independent per-trial streams from it, so results do not depend on thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Keyed counter hash: a pure function of `(key, counter)`.
#[inline]
pub fn hash2(key: u64, counter: u64) -> u64 {
    mix64(mix64(key) ^ counter.wrapping_mul(0xd6e8_feb8_6659_fd93))
}

/// Seed for sub-stream `index` of `seed`.
#[inline]
pub fn derive(seed: u64, index: u64) -> u64 {
    hash2(seed ^ 0x5851_f42d_4c95_7f2d, index)
}

/// RNG for sub-stream `index` of `seed`.
pub fn stream(seed: u64, index: u64) -> Rng {
    Rng::seed_from_u64(derive(seed, index))
}

/// Uniform in `[0, 1)` with 53 bits of precision.
#[inline]
pub fn unit_f64(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
