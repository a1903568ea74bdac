//! Named seed derivation. Every random stream in the crate is derived from a
//! single user seed; nothing reads ambient entropy.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream tags keep independent consumers of one seed apart.
pub mod tag {
    pub const THRESHOLDS: u64 = 0x7468_7265_7368;
    pub const LLL: u64 = 0x6c6c_6c;
    pub const NODE: u64 = 0x6e6f_6465;
    pub const ITERATION: u64 = 0x6974_6572;
    pub const GENERATOR: u64 = 0x6765_6e;
    pub const PARTITION: u64 = 0x7061_7274;
}

#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

pub fn derive(seed: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(tag)) ^ index)
}

pub fn stream(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn derived_stream(seed: u64, tag: u64, index: u64) -> StreamRng {
    stream(derive(seed, tag, index))
}
