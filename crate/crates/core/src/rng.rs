//! Seeded random streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 stream whose
//! seed is derived from a parent seed, a purpose tag and an index:
//!
//! ```text
//! child_seed = mix(mix(parent_seed ^ fnv1a(tag)) ^ index)
//! ```
//!
//! where `mix` is the SplitMix64 finalizer. ChaCha8 output is specified
//! bit-for-bit, so a given `(seed, tag, index)` reproduces the same stream on
//! every platform, and independent stream indices let rows, trials and seeds
//! be processed in any order (or in parallel) without changing results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(tag: &str) -> u64 {
    tag.bytes()
        .fold(FNV_OFFSET, |h, b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

/// SplitMix64 finalizer.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(parent: u64, tag: &str, index: u64) -> u64 {
    mix(mix(parent ^ fnv1a(tag)) ^ index)
}

pub fn stream(parent: u64, tag: &str, index: u64) -> Rng {
    Rng::seed_from_u64(derive_seed(parent, tag, index))
}

/// Uniform `k`-subset of `pool` by a partial Fisher–Yates shuffle; returned in
/// the order drawn.
pub fn sample_without_replacement<T: Copy>(rng: &mut Rng, pool: &[T], k: usize) -> Vec<T> {
    use rand::Rng as _;
    let mut items = pool.to_vec();
    let k = k.min(items.len());
    for i in 0..k {
        let j = rng.gen_range(i..items.len());
        items.swap(i, j);
    }
    items.truncate(k);
    items
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| stream(7, "x", 0).next_u64()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        assert_ne!(stream(7, "x", 0).next_u64(), stream(7, "x", 1).next_u64());
        assert_ne!(stream(7, "x", 0).next_u64(), stream(7, "y", 0).next_u64());
        assert_ne!(stream(7, "x", 0).next_u64(), stream(8, "x", 0).next_u64());
    }

    #[test]
    fn derived_seed_is_pinned() {
        // Frozen so that accidental changes to the derivation rule show up.
        assert_eq!(derive_seed(0, "", 0), mix(mix(FNV_OFFSET)));
        assert_eq!(fnv1a("a"), 0xaf63_dc4c_8601_ec8c);
    }

    #[test]
    fn partial_shuffle_draws_distinct_items() {
        let mut rng = stream(1, "t", 0);
        let pool: Vec<usize> = (0..50).collect();
        let mut s = sample_without_replacement(&mut rng, &pool, 20);
        s.sort_unstable();
        s.dedup();
        assert_eq!(s.len(), 20);
        assert_eq!(sample_without_replacement(&mut rng, &pool, 80).len(), 50);
    }
}
