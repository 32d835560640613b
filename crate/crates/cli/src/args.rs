//! Command-line flags, the optional JSON config file, and how they merge.
//!
//! Every flag may also be given in the config file under the same name in
//! snake_case (`--bias-delta` becomes `bias_delta`). Flags win.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use evoc_core::analysis::{DiscountParams, PivMode};
use evoc_core::sweep::{axis_with_step, GridSpec, DEFAULT_RUNS_PER_CELL};
use evoc_core::{FitnessVariant, WorldConfig};
use serde::Deserialize;

use crate::error::CliError;

pub const WORKERS_ENV: &str = "EVOC_WORKERS";

#[derive(Parser, Debug)]
#[command(name = "evoc", version, about = "Creator/imitator cultural evolution on a toroidal lattice")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Simulate one world and write its per-iteration series.
    Run(RunArgs),
    /// Simulate a {C, p} grid and write the raw store, landscape and ridges.
    Sweep(SweepArgs),
    /// Recompute landscape and ridges from a stored sweep.
    Analyze(AnalyzeArgs),
    /// Convert a series, landscape or ridge file between CSV and JSON.
    Export(ExportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Verbatim,
    HeadStationaryReward,
}

impl From<Variant> for FitnessVariant {
    fn from(v: Variant) -> Self {
        match v {
            Variant::Verbatim => FitnessVariant::Verbatim,
            Variant::HeadStationaryReward => FitnessVariant::HeadStationaryReward,
        }
    }
}

#[derive(Args, Debug, Default)]
pub struct WorldArgs {
    /// JSON file with default values for any flag.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of agents (must equal width x height).
    #[arg(long)]
    pub agents: Option<usize>,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub height: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long, value_enum)]
    pub variant: Option<Variant>,
    /// Time-to-threshold level.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Step size of the bias learning rule.
    #[arg(long)]
    pub bias_delta: Option<f64>,
    /// Discount factor for NPV, in (0, 1].
    #[arg(long)]
    pub rate: Option<f64>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub world: WorldArgs,
    /// Fraction of creators.
    #[arg(long = "c")]
    pub c: Option<f64>,
    /// Probability that a creator invents on a given iteration.
    #[arg(long = "p")]
    pub p: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub world: WorldArgs,
    /// Runs per grid cell (default 100; 20 with --desk).
    #[arg(long)]
    pub runs: Option<usize>,
    /// Use the desk-scale profile (20 runs per cell).
    #[arg(long)]
    pub desk: bool,
    /// Grid spacing for both axes; 1 must be a multiple of it.
    #[arg(long)]
    pub grid_step: Option<f64>,
    /// Explicit C values, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub c_values: Option<Vec<f64>>,
    /// Explicit p values, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub p_values: Option<Vec<f64>>,
    /// Allow C = 0 cells.
    #[arg(long)]
    pub include_zero_c: bool,
    /// Average per-run PIV instead of the PIV of the averaged series.
    #[arg(long)]
    pub piv_per_run: bool,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// JSON file with default values for any flag.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory written by `sweep`.
    #[arg(long)]
    pub store: Option<PathBuf>,
    #[arg(long)]
    pub tau: Option<f64>,
    /// Number of leading periods to value.
    #[arg(long)]
    pub periods: Option<usize>,
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long)]
    pub piv_per_run: bool,
    /// Output directory (defaults to the store).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    /// CSV or JSON file to convert.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub format: Format,
}

/// Values read from `--config`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub c: Option<f64>,
    pub p: Option<f64>,
    pub agents: Option<usize>,
    pub width: Option<usize>,
    pub height: Option<usize>,
    pub iterations: Option<usize>,
    pub variant: Option<Variant>,
    pub tau: Option<f64>,
    pub bias_delta: Option<f64>,
    pub rate: Option<f64>,
    pub periods: Option<usize>,
    pub runs: Option<usize>,
    pub desk: Option<bool>,
    pub grid_step: Option<f64>,
    pub c_values: Option<Vec<f64>>,
    pub p_values: Option<Vec<f64>>,
    pub include_zero_c: Option<bool>,
    pub piv_per_run: Option<bool>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub store: Option<PathBuf>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<ConfigFile, CliError> {
        let Some(path) = path else {
            return Ok(ConfigFile::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("--config: cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("--config: {}: {e}", path.display())))
    }
}

fn fraction(flag: &str, value: f64) -> Result<f64, CliError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(CliError::usage(format!("invalid value for --{flag}: {value} is outside [0, 1]")))
    }
}

fn non_negative(flag: &str, value: f64) -> Result<f64, CliError> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(CliError::usage(format!("invalid value for --{flag}: {value} must be finite and non-negative")))
    }
}

fn rate(value: f64) -> Result<f64, CliError> {
    if value > 0.0 && value <= 1.0 {
        Ok(value)
    } else {
        Err(CliError::usage(format!("invalid value for --rate: {value} is outside (0, 1]")))
    }
}

/// World settings with C, p and seed left at their defaults.
pub fn world_config(args: &WorldArgs, file: &ConfigFile) -> Result<WorldConfig, CliError> {
    let d = WorldConfig::default();
    let width = args.width.or(file.width).unwrap_or(d.width);
    let height = args.height.or(file.height).unwrap_or(d.height);
    let explicit_agents = args.agents.or(file.agents);
    let agents = explicit_agents.unwrap_or(width * height);
    if width == 0 || height == 0 {
        return Err(CliError::usage("invalid value for --width/--height: lattice must be at least 1x1"));
    }
    if width.checked_mul(height) != Some(agents) {
        return Err(CliError::usage(format!(
            "invalid value for --agents: {agents} agents do not fill a {width}x{height} lattice"
        )));
    }
    let iterations = args.iterations.or(file.iterations).unwrap_or(d.iterations);
    if iterations == 0 {
        return Err(CliError::usage("invalid value for --iterations: must be at least 1"));
    }
    Ok(WorldConfig {
        agents,
        width,
        height,
        iterations,
        variant: args.variant.or(file.variant).map_or(d.variant, Into::into),
        tau: non_negative("tau", args.tau.or(file.tau).unwrap_or(d.tau))?,
        bias_delta: non_negative("bias-delta", args.bias_delta.or(file.bias_delta).unwrap_or(d.bias_delta))?,
        ..d
    })
}

pub fn require_seed(flag: Option<u64>, file: &ConfigFile) -> Result<u64, CliError> {
    flag.or(file.seed).ok_or_else(|| CliError::usage("missing --seed (runs never draw hidden entropy)"))
}

pub struct RunPlan {
    pub config: WorldConfig,
    pub rate: f64,
    pub out: PathBuf,
    pub format: Format,
}

pub fn run_plan(args: &RunArgs) -> Result<RunPlan, CliError> {
    let file = ConfigFile::load(args.world.config.as_deref())?;
    let seed = require_seed(args.world.seed, &file)?;
    let c = fraction("c", args.c.or(file.c).unwrap_or(1.0))?;
    let p = fraction("p", args.p.or(file.p).unwrap_or(1.0))?;
    let config = world_config(&args.world, &file)?.with_cp(c, p).with_seed(seed);
    Ok(RunPlan {
        config,
        rate: rate(args.world.rate.or(file.rate).unwrap_or(1.0))?,
        out: args.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("series.csv")),
        format: args.format.or(file.format).unwrap_or(Format::Csv),
    })
}

pub struct SweepPlan {
    pub grid: GridSpec,
    pub params: DiscountParams,
    pub mode: PivMode,
    pub out: PathBuf,
}

fn axis(flag: &str, explicit: Option<Vec<f64>>, step: Option<f64>) -> Result<Vec<f64>, CliError> {
    if let Some(values) = explicit {
        if values.is_empty() {
            return Err(CliError::usage(format!("invalid value for --{flag}: empty list")));
        }
        for &v in &values {
            fraction(flag, v)?;
        }
        return Ok(values);
    }
    let step = step.unwrap_or(0.05);
    let steps = (1.0 / step).round();
    if !(step > 0.0 && step <= 1.0) || (steps * step - 1.0).abs() > 1e-9 {
        return Err(CliError::usage(format!("invalid value for --grid-step: {step} does not divide 1")));
    }
    Ok(axis_with_step(steps as u32))
}

pub fn sweep_plan(args: &SweepArgs) -> Result<SweepPlan, CliError> {
    let file = ConfigFile::load(args.world.config.as_deref())?;
    let seed = require_seed(args.world.seed, &file)?;
    let base = world_config(&args.world, &file)?;
    let desk = args.desk || file.desk.unwrap_or(false);
    let runs = args.runs.or(file.runs).unwrap_or(if desk { 20 } else { DEFAULT_RUNS_PER_CELL });
    if runs == 0 {
        return Err(CliError::usage("invalid value for --runs: must be at least 1"));
    }
    let step = args.grid_step.or(file.grid_step);
    let grid = GridSpec {
        c_values: axis("c-values", args.c_values.clone().or(file.c_values.clone()), step)?,
        p_values: axis("p-values", args.p_values.clone().or(file.p_values.clone()), step)?,
        runs_per_cell: runs,
        base: base.clone(),
        master_seed: seed,
        allow_zero_c: args.include_zero_c || file.include_zero_c.unwrap_or(false),
    };
    grid.validate().map_err(|e| CliError::usage(format!("invalid grid: {e}")))?;
    Ok(SweepPlan {
        params: DiscountParams {
            rate: rate(args.world.rate.or(file.rate).unwrap_or(1.0))?,
            tau: base.tau,
            periods: base.iterations,
        },
        mode: piv_mode(args.piv_per_run || file.piv_per_run.unwrap_or(false)),
        out: args.out.clone().or(file.out).ok_or_else(|| CliError::usage("missing --out directory"))?,
        grid,
    })
}

pub fn piv_mode(per_run: bool) -> PivMode {
    if per_run {
        PivMode::PerRun
    } else {
        PivMode::AveragedSeries
    }
}

pub struct AnalyzePlan {
    pub store: PathBuf,
    pub tau: Option<f64>,
    pub periods: Option<usize>,
    pub rate: f64,
    pub mode: PivMode,
    pub out: PathBuf,
}

pub fn analyze_plan(args: &AnalyzeArgs) -> Result<AnalyzePlan, CliError> {
    let file = ConfigFile::load(args.config.as_deref())?;
    let store = args.store.clone().or(file.store).ok_or_else(|| CliError::usage("missing --store directory"))?;
    let tau = args.tau.or(file.tau).map(|t| non_negative("tau", t)).transpose()?;
    let periods = args.periods.or(file.periods);
    if periods == Some(0) {
        return Err(CliError::usage("invalid value for --periods: must be at least 1"));
    }
    Ok(AnalyzePlan {
        out: args.out.clone().or(file.out).unwrap_or_else(|| store.clone()),
        store,
        tau,
        periods,
        rate: rate(args.rate.or(file.rate).unwrap_or(1.0))?,
        mode: piv_mode(args.piv_per_run || file.piv_per_run.unwrap_or(false)),
    })
}
