//! Counter-based seed derivation.
//!
//! Every random draw in a sweep comes from a stream keyed by integers, so
//! results never depend on scheduling. The scheme, reproducible in any
//! language:
//!
//! * `mix64` is the SplitMix64 finalizer (a bijection on `u64`).
//! * A run seed is `mix64(master + mix64((cell << 32) | run))`, wrapping
//!   arithmetic. For a fixed master this is injective in `(cell, run)`
//!   whenever both indices are below 2^32.
//! * Inside a run, the stream for `(iteration, agent)` is seeded with
//!   `mix64(run_seed + mix64(((iteration << 32) | agent) + 1))` and fed to
//!   `Xoshiro256PlusPlus::seed_from_u64`. Iteration 0 is reserved for world
//!   initialisation; steps use iterations 1, 2, ...

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

pub type StreamRng = Xoshiro256PlusPlus;

#[inline]
pub const fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of run `run` in grid cell `cell` under `master`.
pub fn derive_seed(master: u64, cell: u32, run: u32) -> u64 {
    let key = (u64::from(cell) << 32) | u64::from(run);
    mix64(master.wrapping_add(mix64(key)))
}

/// Random stream for one agent at one iteration of one run.
#[inline]
pub fn agent_stream(run_seed: u64, iteration: u32, agent: u32) -> StreamRng {
    let key = (u64::from(iteration) << 32) | u64::from(agent);
    StreamRng::seed_from_u64(mix64(run_seed.wrapping_add(mix64(key.wrapping_add(1)))))
}

/// Random stream used to set up a world before the first step.
pub fn init_stream(run_seed: u64) -> StreamRng {
    agent_stream(run_seed, 0, 0)
}
