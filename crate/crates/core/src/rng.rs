//! Seed derivation. One master seed fans out into independent substreams
//! (per repetition, per method, per purpose) so that parallel execution
//! order can never change results.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; a well-mixed 64-bit permutation.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Deterministically derive a child seed from a base seed and a salt.
pub fn derive_seed(base: u64, salt: u64) -> u64 {
    splitmix64(base ^ splitmix64(salt))
}

/// The engine's stream RNG, seeded from a single u64.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// FNV-1a 64-bit hash. Used for config hashes in manifests; stable across
/// platforms and compiler versions, unlike `std::hash`.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn derive_seed_is_deterministic_and_salt_sensitive() {
        assert_eq!(derive_seed(42, 7), derive_seed(42, 7));
        assert_ne!(derive_seed(42, 7), derive_seed(42, 8));
        assert_ne!(derive_seed(42, 7), derive_seed(43, 7));
    }

    #[test]
    fn seeded_rng_streams_are_reproducible() {
        let a: Vec<u64> = (0..8).map(|_| seeded_rng(5).random()).collect();
        let mut rng = seeded_rng(5);
        let b: Vec<u64> = (0..8).map(|_| rng.random()).collect();
        // same seed, fresh rng per draw vs one stream differ...
        let mut rng2 = seeded_rng(5);
        let c: Vec<u64> = (0..8).map(|_| rng2.random()).collect();
        assert_eq!(b, c);
        assert_eq!(a[0], b[0]);
    }

    #[test]
    fn fnv_matches_known_vector() {
        // FNV-1a("a") per the reference parameters.
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
    }
}
