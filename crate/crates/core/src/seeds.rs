//! Deterministic sub-seed derivation.
//!
//! Every randomized stage owns an RNG stream derived from the run seed, a
//! purpose tag and an index, so stages can execute concurrently and still
//! reproduce bit-identical output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut state: u64) -> u64 {
    state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn tag_hash(tag: &str) -> u64 {
    // FNV-1a
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn derive(seed: u64, tag: &str, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(tag_hash(tag).wrapping_add(index)))
}

pub fn rng(seed: u64, tag: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, tag, index))
}
