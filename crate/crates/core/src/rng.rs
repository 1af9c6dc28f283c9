//! Seeded, splittable randomness.
//!
//! Every randomized operation takes an explicit stream derived from a master
//! seed, so experiments are reproducible and parallel shards stay
//! deterministic regardless of scheduling.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// splitmix64 finalizer; good enough to decorrelate child streams.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// A deterministic tree of RNG streams rooted at a master seed.
#[derive(Clone, Copy, Debug)]
pub struct SeedTree {
    state: u64,
}

impl SeedTree {
    pub fn new(seed: u64) -> Self {
        SeedTree { state: mix(seed) }
    }

    /// Child stream `i`; children of distinct indices are independent.
    pub fn child(&self, i: u64) -> SeedTree {
        SeedTree {
            state: mix(self.state ^ mix(i.wrapping_add(0x51ed2701))),
        }
    }

    pub fn rng(&self) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(self.state)
    }
}
