//! Named random sub-streams derived from a single master seed.
//!
//! Each consumer of randomness gets its own ChaCha stream, so the fundamental
//! path of a run does not depend on how many agents of each type exist.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Fundamental,
    Scheduler,
    Ga,
    Setup,
    Agent(u32),
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Fundamental => 1,
            Stream::Scheduler => 2,
            Stream::Ga => 3,
            Stream::Setup => 4,
            Stream::Agent(i) => (1 << 32) | u64::from(i),
        }
    }
}

pub fn stream(seed: u64, which: Stream) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which.id());
    rng
}

/// Seed of the `index`-th run in a campaign rooted at `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    // splitmix64 finalizer over the pair
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
