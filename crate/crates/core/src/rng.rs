//! Named, seed-derived random streams.
//!
//! A stream seed is `splitmix64(seed ^ fnv1a64(name))`, which then seeds a
//! ChaCha8 generator. Both steps are fixed, documented algorithms, so a given
//! `(seed, name)` yields the same sequence on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub const UNDERSAMPLE: &str = "curation.undersample";
pub const TOPUP: &str = "curation.topup";
pub const SPLIT: &str = "curation.split";
pub const DETECTOR_INIT: &str = "detector.init";
pub const DETECTOR_SHUFFLE: &str = "detector.shuffle";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Streams {
    seed: u64,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self, name: &str) -> StreamRng {
        ChaCha8Rng::seed_from_u64(self.stream_seed(name))
    }

    pub fn stream_seed(&self, name: &str) -> u64 {
        splitmix64(self.seed ^ fnv1a64(name.as_bytes()))
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
