//! Derived random streams.
//!
//! A single user seed drives every random decision. Each purpose gets its own
//! stream, offset from the base seed by a fixed constant, so changing how many
//! draws one purpose makes never perturbs another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Init,
    Shuffle,
    Split,
    TrainNegatives,
    TestNegatives,
    Planted,
}

impl Stream {
    fn offset(self) -> u64 {
        match self {
            Stream::Init => 0x1000_0000_0000_0001,
            Stream::Shuffle => 0x2000_0000_0000_0003,
            Stream::Split => 0x3000_0000_0000_0005,
            Stream::TrainNegatives => 0x4000_0000_0000_0007,
            Stream::TestNegatives => 0x5000_0000_0000_0009,
            Stream::Planted => 0x6000_0000_0000_000b,
        }
    }
}

const FOLD_STRIDE: u64 = 0x9e37_79b9_7f4a_7c15;

pub fn derive(seed: u64, stream: Stream) -> u64 {
    seed.wrapping_add(stream.offset())
}

/// Seed for one fold of a cross-validation run.
pub fn for_fold(seed: u64, fold: usize) -> u64 {
    seed.wrapping_add(FOLD_STRIDE.wrapping_mul(fold as u64 + 1))
}

pub fn rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, stream))
}
