//! Deterministic `{C, p}` grid sweeps.
//!
//! Each `(cell, run)` pair gets its seed from [`derive_seed`], and results
//! are always gathered in `(cell, run)` order, so the output is identical for
//! any worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::CellSeries;
use crate::error::SweepError;
use crate::rng::derive_seed;
use crate::world::{run_simulation, RunSeries, WorldConfig};

pub const DEFAULT_RUNS_PER_CELL: usize = 100;
pub const DESK_RUNS_PER_CELL: usize = 20;
pub const SEED_SCHEME: &str = "splitmix64: mix64(master + mix64((cell << 32) | run))";

/// `0.05, 0.10, ..., 1.00`.
pub fn default_axis() -> Vec<f64> {
    axis_with_step(20)
}

/// `1/steps, 2/steps, ..., 1`.
pub fn axis_with_step(steps: u32) -> Vec<f64> {
    (1..=steps).map(|i| f64::from(i) / f64::from(steps)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub c_values: Vec<f64>,
    pub p_values: Vec<f64>,
    pub runs_per_cell: usize,
    /// World settings shared by every cell; its C, p and seed are overridden.
    pub base: WorldConfig,
    pub master_seed: u64,
    /// Permit `C = 0` cells (nothing ever changes in them).
    #[serde(default)]
    pub allow_zero_c: bool,
}

impl GridSpec {
    /// The full-scale grid: 20 x 20 cells, 100 runs each.
    pub fn full_scale(master_seed: u64) -> Self {
        GridSpec {
            c_values: default_axis(),
            p_values: default_axis(),
            runs_per_cell: DEFAULT_RUNS_PER_CELL,
            base: WorldConfig::default(),
            master_seed,
            allow_zero_c: false,
        }
    }

    /// The 20 x 20 grid with 20 runs per cell.
    pub fn desk_scale(master_seed: u64) -> Self {
        GridSpec { runs_per_cell: DESK_RUNS_PER_CELL, ..GridSpec::full_scale(master_seed) }
    }

    pub fn cell_count(&self) -> usize {
        self.c_values.len() * self.p_values.len()
    }

    /// `(C, p)` of cell `index`; cells are ordered C-major.
    pub fn cell(&self, index: usize) -> (f64, f64) {
        let np = self.p_values.len();
        (self.c_values[index / np], self.p_values[index % np])
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        let bad = |msg: String| Err(SweepError::InvalidGrid(msg));
        if self.c_values.is_empty() || self.p_values.is_empty() {
            return bad("grid axes must be non-empty".into());
        }
        if self.runs_per_cell == 0 {
            return bad("runs per cell must be positive".into());
        }
        for &c in &self.c_values {
            let ok = if self.allow_zero_c { (0.0..=1.0).contains(&c) } else { c > 0.0 && c <= 1.0 };
            if !ok {
                return bad(format!("C value {c} outside {}", if self.allow_zero_c { "[0, 1]" } else { "(0, 1]" }));
            }
        }
        if let Some(p) = self.p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return bad(format!("p value {p} outside [0, 1]"));
        }
        if !self.c_values.contains(&1.0) || !self.p_values.contains(&1.0) {
            return bad("grid must include the {C=1, p=1} baseline cell".into());
        }
        if u32::try_from(self.cell_count()).is_err() || u32::try_from(self.runs_per_cell).is_err() {
            return bad("grid too large for the seed scheme".into());
        }
        self.base.validate().map_err(|source| SweepError::Cell {
            c: self.base.creators,
            p: self.base.creativity,
            source,
        })
    }

    /// World configuration of run `run` in cell `cell`.
    pub fn run_config(&self, cell: usize, run: usize) -> WorldConfig {
        let (c, p) = self.cell(cell);
        self.base.clone().with_cp(c, p).with_seed(derive_seed(self.master_seed, cell as u32, run as u32))
    }
}

/// Where a sweep came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub grid: GridSpec,
    pub seed_scheme: String,
    pub variant: String,
    pub version: String,
}

impl Provenance {
    pub fn for_grid(grid: &GridSpec) -> Self {
        Provenance {
            grid: grid.clone(),
            seed_scheme: SEED_SCHEME.to_string(),
            variant: grid.base.variant.name().to_string(),
            version: concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION")).to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub provenance: Provenance,
    /// One entry per cell, in grid order.
    pub cells: Vec<CellSeries>,
}

/// Run every cell of the grid on `workers` threads, handing each finished
/// cell to `sink` in grid order. At most `workers` cells are held at once.
pub fn run_sweep_streaming<F>(spec: &GridSpec, workers: usize, mut sink: F) -> Result<(), SweepError>
where
    F: FnMut(CellSeries),
{
    spec.validate()?;
    for cell in 0..spec.cell_count() {
        let (c, p) = spec.cell(cell);
        spec.run_config(cell, 0).validate().map_err(|source| SweepError::Cell { c, p, source })?;
    }
    let workers = workers.max(1);
    let pool =
        rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(|e| SweepError::Pool(e.to_string()))?;
    let runs = spec.runs_per_cell;
    let cells: Vec<usize> = (0..spec.cell_count()).collect();
    for batch in cells.chunks(workers) {
        let jobs: Vec<(usize, usize)> = batch.iter().flat_map(|&c| (0..runs).map(move |r| (c, r))).collect();
        let results: Vec<RunSeries> = pool.install(|| {
            jobs.par_iter()
                .map(|&(cell, run)| run_simulation(&spec.run_config(cell, run)).expect("validated above"))
                .collect()
        });
        let mut results = results.into_iter();
        for &cell in batch {
            let (c, p) = spec.cell(cell);
            sink(CellSeries { c, p, runs: results.by_ref().take(runs).collect() });
        }
    }
    Ok(())
}

pub fn run_sweep(spec: &GridSpec, workers: usize) -> Result<SweepResult, SweepError> {
    let mut cells = Vec::with_capacity(spec.cell_count());
    run_sweep_streaming(spec, workers, |cell| cells.push(cell))?;
    Ok(SweepResult { provenance: Provenance::for_grid(spec), cells })
}
