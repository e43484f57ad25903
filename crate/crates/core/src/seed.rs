//! Seed derivation and seeded generators.
//!
//! Every random choice in the pipeline is made from a generator seeded by
//! [`derive_seed`], so results never depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a global seed with a sentence index and system id.
pub fn derive_seed(global: u64, sentence: u64, system: u64) -> u64 {
    let a = splitmix64(global);
    let b = splitmix64(a ^ sentence.rotate_left(17));
    splitmix64(b ^ system.rotate_left(41))
}

pub fn rng_for(global: u64, sentence: u64, system: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(derive_seed(global, sentence, system))
}

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}
