//! Seed handling.
//!
//! Every random choice in the crate is drawn from a ChaCha8 generator. A run
//! is identified by one master seed; each stage derives its own seed with
//! [`derive_seed`] from the master seed, a stage tag and an index (retry
//! number, vortex level, ...), so stages never share a stream and a retry
//! never replays the draws of the attempt before it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(tag: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// `splitmix64(splitmix64(master ^ fnv1a(tag)) ^ index * GOLDEN)`.
pub fn derive_seed(master: u64, tag: &str, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ fnv1a(tag)) ^ index.wrapping_mul(GOLDEN))
}

pub fn rng_from(master: u64, tag: &str, index: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, tag, index))
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
