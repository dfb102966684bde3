//! Seeded random streams.
//!
//! Every stochastic routine draws from ChaCha8 seeded through
//! `SeedableRng::seed_from_u64`, so a `u64` seed fully determines the output
//! on every platform. Monte-Carlo trials get child seeds `master + index`
//! and separate sub-streams (ChaCha stream ids) for each consumer inside a
//! trial, so adding a consumer never shifts the draws of another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// ChaCha stream ids for the independent consumers of one trial seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Network = 0,
    Sheets = 1,
    Shock = 2,
    Walk = 3,
}

pub fn stream(seed: u64, which: Stream) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}

/// Child seed for Monte-Carlo iteration `index`.
pub fn child_seed(master: u64, index: u64) -> u64 {
    master.wrapping_add(index)
}
