//! Seeded random streams.
//!
//! Every randomized routine takes an explicit RNG. Independent trials use
//! streams derived from a base seed so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// The generator used throughout the crate.
pub type OrbitRng = ChaCha12Rng;

/// Creates the canonical generator for `seed`.
pub fn rng_from_seed(seed: u64) -> OrbitRng {
    OrbitRng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of stream `index` from `base`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(splitmix64(base) ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

/// Generator for stream `index` of `base`.
pub fn derived_rng(base: u64, index: u64) -> OrbitRng {
    rng_from_seed(derive_seed(base, index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn derived_streams_are_distinct_and_stable() {
        let a = derive_seed(42, 0);
        let b = derive_seed(42, 1);
        assert_ne!(a, b);
        assert_eq!(a, derive_seed(42, 0));
        let mut r1 = derived_rng(7, 3);
        let mut r2 = derived_rng(7, 3);
        assert_eq!(r1.random::<u64>(), r2.random::<u64>());
    }
}
