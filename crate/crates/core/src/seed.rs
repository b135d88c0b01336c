//! Seed derivation.
//!
//! Every random stream in a run is derived from one top-level seed and a
//! list of string labels (target id, configuration key, fold index, ...):
//!
//! ```text
//! h = FNV-1a-64 over the labels, each label followed by a 0xFF byte
//! derived = splitmix64(root ^ h)
//! ```
//!
//! The derivation is stable across platforms and releases.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
pub(crate) const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(root: u64, labels: &[&str]) -> u64 {
    let mut h = FNV_OFFSET;
    for label in labels {
        for &b in label.as_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(FNV_PRIME);
        }
        h ^= 0xff;
        h = h.wrapping_mul(FNV_PRIME);
    }
    splitmix64(root ^ h)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
