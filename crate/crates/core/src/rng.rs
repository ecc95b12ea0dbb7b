//! Seeded, splittable randomness.
//!
//! Every stochastic operation takes an explicit seed or generator. Child
//! seeds are derived from a master seed with a counter-based SplitMix64
//! mix of `(master, stream, index)`, so run `i` of an ensemble gets the same
//! seed regardless of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the crate.
pub type DfsRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> DfsRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed for item `index` of stream `stream` under `master`.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    let a = splitmix64(master ^ 0x6A09_E667_F3BC_C908);
    let b = splitmix64(a ^ stream.wrapping_mul(0xD6E8_FEB8_6659_FD93));
    splitmix64(b ^ index.wrapping_mul(0xA076_1D64_78BD_642F))
}

/// Named streams, so different uses of one master seed never collide.
pub mod stream {
    pub const CHANNEL_U1: u64 = 1;
    pub const CHANNEL_U2: u64 = 2;
    pub const RUN: u64 = 3;
    pub const PROJECTOR: u64 = 4;
    pub const COUNTS: u64 = 5;
    pub const SAMPLES: u64 = 6;
    pub const ENGINEERED: u64 = 7;
}
