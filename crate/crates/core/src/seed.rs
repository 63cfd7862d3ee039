//! Derivation of independent sub-seeds from a single user seed.
//!
//! Every random decision in a run (noise, subsampling, k-means seeding,
//! graph-parameter sampling, constraint sampling) draws from its own stream,
//! so changing how one stage consumes randomness never perturbs another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Named randomness consumers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    Noise,
    Sampling,
    KMeans,
    GraphParams,
    Constraints,
    Synthesis,
}

impl Stream {
    fn counter(self) -> u64 {
        match self {
            Stream::Noise => 0,
            Stream::Sampling => 1,
            Stream::KMeans => 2,
            Stream::GraphParams => 3,
            Stream::Constraints => 4,
            Stream::Synthesis => 5,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based split: the sub-seed depends only on `(seed, stream)`.
pub fn derive(seed: u64, stream: Stream) -> u64 {
    splitmix64(splitmix64(seed) ^ splitmix64(stream.counter().wrapping_add(0x5EED)))
}

/// Seed of the `run`-th repetition drawn from one stream seed; run 0 keeps it.
pub(crate) fn derive_run(seed: u64, run: u64) -> u64 {
    if run == 0 {
        seed
    } else {
        splitmix64(seed ^ splitmix64(run))
    }
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
