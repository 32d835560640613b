//! On-disk formats.
//!
//! All files are CSV with fixed headers; reals are written with 17
//! significant digits so that reading a file back gives the exact `f64`s.
//!
//! * series: `C,p,run,iteration,mean_fitness,diversity`
//! * landscape: `C,p,mean_ttt,censored_runs,log10_mean_ttt,piv,runs`
//! * ridge: `fixed_axis,fixed_value,opt_value,valuation`
//!
//! A sweep store is a directory holding `series.csv` and `provenance.json`.

use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::analysis::{Axis, CellSeries, LandscapePoint, RidgePoint};
use crate::error::StoreError;
use crate::sweep::{Provenance, SweepResult};
use crate::world::RunSeries;

pub const SERIES_HEADER: [&str; 6] = ["C", "p", "run", "iteration", "mean_fitness", "diversity"];
pub const LANDSCAPE_HEADER: [&str; 7] = ["C", "p", "mean_ttt", "censored_runs", "log10_mean_ttt", "piv", "runs"];
pub const RIDGE_HEADER: [&str; 4] = ["fixed_axis", "fixed_value", "opt_value", "valuation"];

pub const SERIES_FILE: &str = "series.csv";
pub const PROVENANCE_FILE: &str = "provenance.json";

/// Real number with 17 significant digits, e.g. `9.5000000000000000e0`.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse<T: std::str::FromStr>(field: Option<&str>, name: &str, line: u64) -> Result<T, StoreError> {
    let raw = field.ok_or_else(|| StoreError::Format(format!("line {line}: missing {name}")))?;
    raw.trim().parse().map_err(|_| StoreError::Format(format!("line {line}: bad {name} value {raw:?}")))
}

fn check_header<R: Read>(reader: &mut csv::Reader<R>, expected: &[&str]) -> Result<(), StoreError> {
    let header = reader.headers()?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(StoreError::Format(format!(
            "unexpected header {:?}, expected {}",
            header.iter().collect::<Vec<_>>(),
            expected.join(",")
        )));
    }
    Ok(())
}

/// One row of a series file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    #[serde(rename = "C")]
    pub c: f64,
    pub p: f64,
    pub run: usize,
    pub iteration: usize,
    pub mean_fitness: f64,
    pub diversity: u32,
}

/// The rows of one run, iterations numbered from 1.
pub fn run_rows(c: f64, p: f64, run: usize, series: &RunSeries) -> impl Iterator<Item = SeriesRow> + '_ {
    series
        .mean_fitness
        .iter()
        .zip(&series.diversity)
        .enumerate()
        .map(move |(i, (&mean_fitness, &diversity))| SeriesRow { c, p, run, iteration: i + 1, mean_fitness, diversity })
}

/// Streams cells into a series CSV.
pub struct SeriesWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> SeriesWriter<W> {
    pub fn new(w: W) -> Result<Self, StoreError> {
        let mut inner = csv::Writer::from_writer(w);
        inner.write_record(SERIES_HEADER)?;
        Ok(SeriesWriter { inner })
    }

    pub fn write_row(&mut self, row: &SeriesRow) -> Result<(), StoreError> {
        self.inner.write_record([
            fmt_real(row.c),
            fmt_real(row.p),
            row.run.to_string(),
            row.iteration.to_string(),
            fmt_real(row.mean_fitness),
            row.diversity.to_string(),
        ])?;
        Ok(())
    }

    pub fn write_run(&mut self, c: f64, p: f64, run: usize, series: &RunSeries) -> Result<(), StoreError> {
        run_rows(c, p, run, series).try_for_each(|row| self.write_row(&row))
    }

    pub fn write_cell(&mut self, cell: &CellSeries) -> Result<(), StoreError> {
        for (run, series) in cell.runs.iter().enumerate() {
            self.write_run(cell.c, cell.p, run, series)?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<W, StoreError> {
        self.inner.flush()?;
        self.inner.into_inner().map_err(|e| StoreError::Io(e.into_error()))
    }
}

pub fn write_series<W: Write>(w: W, cells: &[CellSeries]) -> Result<W, StoreError> {
    let mut writer = SeriesWriter::new(w)?;
    for cell in cells {
        writer.write_cell(cell)?;
    }
    writer.finish()
}

pub fn read_series_rows<R: Read>(r: R) -> Result<Vec<SeriesRow>, StoreError> {
    let mut reader = csv::Reader::from_reader(r);
    check_header(&mut reader, &SERIES_HEADER)?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        rows.push(SeriesRow {
            c: parse(record.get(0), "C", line)?,
            p: parse(record.get(1), "p", line)?,
            run: parse(record.get(2), "run", line)?,
            iteration: parse(record.get(3), "iteration", line)?,
            mean_fitness: parse(record.get(4), "mean_fitness", line)?,
            diversity: parse(record.get(5), "diversity", line)?,
        });
    }
    Ok(rows)
}

/// Regroup rows into cells. Rows must be grouped by cell, then run, with
/// iterations `1..=n` in order.
pub fn rows_to_cells(rows: &[SeriesRow]) -> Result<Vec<CellSeries>, StoreError> {
    let mut cells: Vec<CellSeries> = Vec::new();
    for row in rows {
        let same_cell = cells.last().is_some_and(|c| c.c == row.c && c.p == row.p);
        if !same_cell {
            if cells.iter().any(|c| c.c == row.c && c.p == row.p) {
                return Err(StoreError::Format(format!("cell C={} p={} is not contiguous", row.c, row.p)));
            }
            cells.push(CellSeries { c: row.c, p: row.p, runs: Vec::new() });
        }
        let cell = cells.last_mut().expect("pushed above");
        if row.iteration == 1 {
            if row.run != cell.runs.len() {
                return Err(StoreError::Format(format!(
                    "cell C={} p={}: expected run {}, found run {}",
                    row.c,
                    row.p,
                    cell.runs.len(),
                    row.run
                )));
            }
            cell.runs.push(RunSeries::default());
        }
        let expected_run = cell.runs.len().checked_sub(1);
        let series = match cell.runs.last_mut() {
            Some(s) if Some(row.run) == expected_run && row.iteration == s.len() + 1 => s,
            _ => {
                return Err(StoreError::Format(format!(
                    "cell C={} p={} run {}: iteration {} out of order",
                    row.c, row.p, row.run, row.iteration
                )))
            }
        };
        series.mean_fitness.push(row.mean_fitness);
        series.diversity.push(row.diversity);
    }
    Ok(cells)
}

pub fn read_series<R: Read>(r: R) -> Result<Vec<CellSeries>, StoreError> {
    rows_to_cells(&read_series_rows(r)?)
}

pub fn write_landscape<W: Write>(w: W, points: &[LandscapePoint]) -> Result<W, StoreError> {
    let mut writer = csv::Writer::from_writer(w);
    writer.write_record(LANDSCAPE_HEADER)?;
    for pt in points {
        writer.write_record([
            fmt_real(pt.c),
            fmt_real(pt.p),
            fmt_real(pt.mean_ttt),
            pt.censored_runs.to_string(),
            fmt_real(pt.log10_mean_ttt),
            fmt_real(pt.piv),
            pt.runs.to_string(),
        ])?;
    }
    writer.flush()?;
    writer.into_inner().map_err(|e| StoreError::Io(e.into_error()))
}

pub fn read_landscape<R: Read>(r: R) -> Result<Vec<LandscapePoint>, StoreError> {
    let mut reader = csv::Reader::from_reader(r);
    check_header(&mut reader, &LANDSCAPE_HEADER)?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        out.push(LandscapePoint {
            c: parse(record.get(0), "C", line)?,
            p: parse(record.get(1), "p", line)?,
            mean_ttt: parse(record.get(2), "mean_ttt", line)?,
            censored_runs: parse(record.get(3), "censored_runs", line)?,
            log10_mean_ttt: parse(record.get(4), "log10_mean_ttt", line)?,
            piv: parse(record.get(5), "piv", line)?,
            runs: parse(record.get(6), "runs", line)?,
        });
    }
    Ok(out)
}

pub fn write_ridge<W: Write>(w: W, ridge: &[RidgePoint]) -> Result<W, StoreError> {
    let mut writer = csv::Writer::from_writer(w);
    writer.write_record(RIDGE_HEADER)?;
    for r in ridge {
        writer.write_record([
            r.fixed_axis.name().to_string(),
            fmt_real(r.fixed_value),
            fmt_real(r.opt_value),
            fmt_real(r.valuation),
        ])?;
    }
    writer.flush()?;
    writer.into_inner().map_err(|e| StoreError::Io(e.into_error()))
}

pub fn read_ridge<R: Read>(r: R) -> Result<Vec<RidgePoint>, StoreError> {
    let mut reader = csv::Reader::from_reader(r);
    check_header(&mut reader, &RIDGE_HEADER)?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let axis: String = parse(record.get(0), "fixed_axis", line)?;
        out.push(RidgePoint {
            fixed_axis: Axis::parse(&axis)
                .ok_or_else(|| StoreError::Format(format!("line {line}: bad fixed_axis {axis:?}")))?,
            fixed_value: parse(record.get(1), "fixed_value", line)?,
            opt_value: parse(record.get(2), "opt_value", line)?,
            valuation: parse(record.get(3), "valuation", line)?,
        });
    }
    Ok(out)
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(mut w: W, value: &T) -> Result<W, StoreError> {
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    Ok(w)
}

pub fn read_json<R: Read, T: DeserializeOwned>(r: R) -> Result<T, StoreError> {
    Ok(serde_json::from_reader(r)?)
}

/// Write `path` through a temporary sibling that is renamed into place only
/// when `fill` succeeds, so a failure never leaves a partial file behind.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<(), StoreError>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<(), StoreError>,
{
    let tmp = tmp_path(path);
    let result = (|| {
        let mut w = BufWriter::new(File::create(&tmp)?);
        fill(&mut w)?;
        w.flush()?;
        w.get_ref().sync_all()?;
        Ok(())
    })();
    match result {
        Ok(()) => Ok(fs::rename(&tmp, path)?),
        Err(e) => {
            let _ = fs::remove_file(&tmp);
            Err(e)
        }
    }
}

fn tmp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".partial");
    path.with_file_name(name)
}

/// Write a sweep store into `dir`, creating it if needed.
pub fn save_store(dir: &Path, result: &SweepResult) -> Result<(), StoreError> {
    fs::create_dir_all(dir)?;
    write_atomic(&dir.join(PROVENANCE_FILE), |w| write_json(w, &result.provenance).map(drop))?;
    write_atomic(&dir.join(SERIES_FILE), |w| write_series(w, &result.cells).map(drop))
}

pub fn load_store(dir: &Path) -> Result<SweepResult, StoreError> {
    let provenance: Provenance = read_json(File::open(dir.join(PROVENANCE_FILE))?)?;
    let cells = read_series(File::open(dir.join(SERIES_FILE))?)?;
    Ok(SweepResult { provenance, cells })
}
