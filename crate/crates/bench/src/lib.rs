//! Shared fixtures for the criterion benchmarks.

use evoc_core::sweep::GridSpec;
use evoc_core::WorldConfig;

pub const SEED: u64 = 0xBE4C;

/// A default 32x32 world at the given creator fraction and creativity.
pub fn world_config(c: f64, p: f64) -> WorldConfig {
    WorldConfig::default().with_cp(c, p).with_seed(SEED)
}

/// A 2x2 grid with a few runs per cell, small enough to time repeatedly.
pub fn small_grid() -> GridSpec {
    GridSpec { c_values: vec![0.5, 1.0], p_values: vec![0.5, 1.0], runs_per_cell: 4, ..GridSpec::desk_scale(SEED) }
}
