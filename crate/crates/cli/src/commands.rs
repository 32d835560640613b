use std::fs::{self, File};
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use anyhow::Context;
use evoc_core::analysis::{
    build_landscape, global_optimum, npv, optima_ridge, time_to_threshold, Axis, CellSeries, DiscountParams, PivMode,
    RidgePoint, Valuation,
};
use evoc_core::store::{
    load_store, read_landscape, read_ridge, read_series_rows, run_rows, save_store, write_atomic, write_json,
    write_landscape, write_ridge, SeriesRow, SeriesWriter, LANDSCAPE_HEADER, RIDGE_HEADER, SERIES_HEADER,
};
use evoc_core::sweep::run_sweep;
use evoc_core::{run_simulation, ConfigError, LandscapePoint, SweepError, Ttt};
use serde::{Deserialize, Serialize};

use crate::args::{self, AnalyzeArgs, ExportArgs, Format, RunArgs, SweepArgs, WORKERS_ENV};
use crate::error::CliError;

pub const LANDSCAPE_FILE: &str = "landscape.csv";
pub const RIDGE_TTT_FILE: &str = "ridge_ttt.csv";
pub const RIDGE_PIV_FILE: &str = "ridge_piv.csv";

/// The JSON form of every file `export` understands.
#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", content = "rows", rename_all = "lowercase")]
enum Document {
    Series(Vec<SeriesRow>),
    Landscape(Vec<LandscapePoint>),
    Ridge(Vec<RidgePoint>),
}

fn workers() -> Result<usize, CliError> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::usage(format!("invalid value for {WORKERS_ENV}: {v:?}"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn config_error(err: ConfigError) -> CliError {
    let flag = match &err {
        ConfigError::LatticeMismatch { .. } | ConfigError::EmptyLattice => "--agents/--width/--height",
        ConfigError::FractionOutOfRange { name, .. } | ConfigError::InvalidParameter { name, .. } => name,
    };
    CliError::usage(format!("invalid value for {flag}: {err}"))
}

pub fn run(a: &RunArgs) -> Result<(), CliError> {
    let plan = args::run_plan(a)?;
    let cfg = &plan.config;
    let series = run_simulation(cfg).map_err(config_error)?;
    let (c, p) = (cfg.creators, cfg.creativity);
    write_atomic(&plan.out, |w| match plan.format {
        Format::Csv => {
            let mut writer = SeriesWriter::new(w)?;
            writer.write_run(c, p, 0, &series)?;
            writer.finish().map(drop)
        }
        Format::Json => {
            let rows = run_rows(c, p, 0, &series).collect();
            write_json(w, &Document::Series(rows)).map(drop)
        }
    })
    .with_context(|| format!("writing {}", plan.out.display()))?;

    let last = series.mean_fitness.last().copied().unwrap_or(f64::NAN);
    println!("final_mean_fitness {last}");
    match time_to_threshold(&series.mean_fitness, cfg.tau) {
        Ttt::Reached(t) => println!("ttt {t}"),
        Ttt::Censored { bound } => println!("ttt censored (bound {bound})"),
    }
    println!("npv {}", npv(&series.mean_fitness, plan.rate)?);
    Ok(())
}

pub fn sweep(a: &SweepArgs) -> Result<(), CliError> {
    let plan = args::sweep_plan(a)?;
    let workers = workers()?;
    let result = run_sweep(&plan.grid, workers).map_err(|e| match e {
        SweepError::Cell { source, .. } => config_error(source),
        SweepError::InvalidGrid(msg) => CliError::usage(format!("invalid grid: {msg}")),
        other => CliError::from(other),
    })?;
    fs::create_dir_all(&plan.out).with_context(|| format!("creating {}", plan.out.display()))?;
    write_outputs(&plan.out, &result.cells, &plan.params, plan.mode)?;
    save_store(&plan.out, &result).with_context(|| format!("writing store in {}", plan.out.display()))?;
    Ok(())
}

pub fn analyze(a: &AnalyzeArgs) -> Result<(), CliError> {
    let plan = args::analyze_plan(a)?;
    let store = load_store(&plan.store).with_context(|| format!("reading store {}", plan.store.display()))?;
    let base = &store.provenance.grid.base;
    let params = DiscountParams {
        rate: plan.rate,
        tau: plan.tau.unwrap_or(base.tau),
        periods: plan.periods.unwrap_or(base.iterations),
    };
    fs::create_dir_all(&plan.out).with_context(|| format!("creating {}", plan.out.display()))?;
    write_outputs(&plan.out, &store.cells, &params, plan.mode)
}

fn write_outputs(dir: &Path, cells: &[CellSeries], params: &DiscountParams, mode: PivMode) -> Result<(), CliError> {
    let landscape = build_landscape(cells, params, mode)?;
    let ridge = |v: Valuation| -> Vec<RidgePoint> {
        let mut r = optima_ridge(&landscape, Axis::C, v);
        r.extend(optima_ridge(&landscape, Axis::P, v));
        r
    };
    let ridge_ttt = ridge(Valuation::MeanTtt);
    let ridge_piv = ridge(Valuation::Piv);
    write_atomic(&dir.join(LANDSCAPE_FILE), |w| write_landscape(w, &landscape).map(drop))?;
    write_atomic(&dir.join(RIDGE_TTT_FILE), |w| write_ridge(w, &ridge_ttt).map(drop))?;
    write_atomic(&dir.join(RIDGE_PIV_FILE), |w| write_ridge(w, &ridge_piv).map(drop))?;

    if let Some(best) = global_optimum(&landscape, Valuation::MeanTtt) {
        println!("ttt optimum C={} p={} mean_ttt={}", best.c, best.p, best.mean_ttt);
    }
    if let Some(best) = global_optimum(&landscape, Valuation::Piv) {
        println!("piv optimum C={} p={} piv={}", best.c, best.p, best.piv);
    }
    Ok(())
}

fn read_document(path: &Path) -> Result<Document, CliError> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .with_context(|| format!("reading {}", path.display()))?;
    if text.trim_start().starts_with('{') {
        return Ok(serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?);
    }
    let mut header = String::new();
    BufReader::new(text.as_bytes()).read_line(&mut header)?;
    let fields: Vec<&str> = header.trim_end().split(',').collect();
    let bytes = text.as_bytes();
    let doc = if fields == SERIES_HEADER {
        Document::Series(read_series_rows(bytes)?)
    } else if fields == LANDSCAPE_HEADER {
        Document::Landscape(read_landscape(bytes)?)
    } else if fields == RIDGE_HEADER {
        Document::Ridge(read_ridge(bytes)?)
    } else {
        return Err(CliError::usage(format!(
            "invalid value for --input: {} is not a series, landscape or ridge file",
            path.display()
        )));
    };
    Ok(doc)
}

pub fn export(a: &ExportArgs) -> Result<(), CliError> {
    let doc = read_document(&a.input)?;
    write_atomic(&a.out, |w| match (a.format, &doc) {
        (Format::Json, doc) => write_json(w, doc).map(drop),
        (Format::Csv, Document::Series(rows)) => {
            let mut writer = SeriesWriter::new(w)?;
            for row in rows {
                writer.write_row(row)?;
            }
            writer.finish().map(drop)
        }
        (Format::Csv, Document::Landscape(points)) => write_landscape(w, points).map(drop),
        (Format::Csv, Document::Ridge(ridge)) => write_ridge(w, ridge).map(drop),
    })
    .with_context(|| format!("writing {}", a.out.display()))?;
    Ok(())
}
