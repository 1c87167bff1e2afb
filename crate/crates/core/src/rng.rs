//! Deterministic RNG streams.
//!
//! Every random draw comes from a `ChaCha8Rng` seeded with the run seed and
//! positioned on stream `(subsystem << 48) | replica`. Subsystems never share
//! a stream, so e.g. adding walk replicas does not perturb field births.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Subsystem {
    Lines = 1,
    Arak = 2,
    Births = 3,
    Proposals = 4,
    Acceptance = 5,
    Walks = 6,
    Environment = 7,
    Tilt = 8,
    Misc = 9,
}

/// Stream for replica `replica` of `sub` under `seed`.
pub fn stream(seed: u64, sub: Subsystem, replica: u64) -> Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(((sub as u64) << 48) | (replica & ((1 << 48) - 1)));
    r
}

/// Seed for a nested computation (e.g. the environment of replica `i`),
/// derived from a parent stream position so it is reproducible.
pub fn child_seed(seed: u64, sub: Subsystem, replica: u64) -> u64 {
    use rand::RngCore;
    stream(seed, sub, replica).next_u64()
}
