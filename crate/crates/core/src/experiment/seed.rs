//! Seed derivation.
//!
//! The seed of trial `t` is output `t + 1` of a SplitMix64 generator seeded
//! with the base seed, so it depends only on `(base, t)` and adding trials
//! never changes earlier ones. Inside a trial, ChaCha8 streams separate the
//! consumers that need randomness.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 output function (Steele, Lea and Flood).
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn trial_seed(base: u64, trial: usize) -> u64 {
    splitmix64(base.wrapping_add((trial as u64).wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Stream used for the shared initial centers of a trial.
pub const INIT_STREAM: u64 = 0;
/// Stream used by the stochastic-dropout baseline.
pub const STOCHASTIC_STREAM: u64 = 1;
/// Stream used by the synthetic data generator.
pub const SYNTH_STREAM: u64 = 2;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
