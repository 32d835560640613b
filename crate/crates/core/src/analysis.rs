//! Valuing mean-fitness series: discounted sums, time to threshold, and the
//! baseline-relative present innovation value, plus the `{C, p}` landscape
//! built from them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;
use crate::world::{RunSeries, DEFAULT_ITERATIONS, DEFAULT_TAU};

/// Baseline values at or below this are treated as degenerate.
pub const BASELINE_EPSILON: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscountParams {
    /// Per-period discount factor, `0 < rate <= 1`.
    pub rate: f64,
    pub tau: f64,
    /// Horizon: valuations use the first `periods` entries of each series.
    pub periods: usize,
}

impl Default for DiscountParams {
    fn default() -> Self {
        DiscountParams { rate: 1.0, tau: DEFAULT_TAU, periods: DEFAULT_ITERATIONS }
    }
}

impl DiscountParams {
    /// Discount factor for a safe per-period interest rate of `percent` %.
    pub fn rate_from_interest(percent: f64) -> f64 {
        ((100.0 + percent) / 100.0).recip()
    }
}

/// Net present value `sum_t rate^(t-1) * b_t`.
pub fn npv(series: &[f64], rate: f64) -> Result<f64, AnalysisError> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(AnalysisError::RateOutOfRange(rate));
    }
    if series.is_empty() {
        return Err(AnalysisError::EmptySeries);
    }
    let mut factor = 1.0;
    let mut total = 0.0;
    for &b in series {
        total += factor * b;
        factor *= rate;
    }
    Ok(total)
}

/// Time to threshold of one series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ttt {
    /// First (1-based) period at which the series reached the threshold.
    Reached(usize),
    /// Never reached within `bound` periods.
    Censored { bound: usize },
}

impl Ttt {
    /// The reached period, or the bound for a censored series.
    pub fn value_or_bound(self) -> usize {
        match self {
            Ttt::Reached(t) => t,
            Ttt::Censored { bound } => bound,
        }
    }

    pub fn is_censored(self) -> bool {
        matches!(self, Ttt::Censored { .. })
    }
}

pub fn time_to_threshold(series: &[f64], tau: f64) -> Ttt {
    match series.iter().position(|&f| f >= tau) {
        Some(i) => Ttt::Reached(i + 1),
        None => Ttt::Censored { bound: series.len() },
    }
}

/// Present innovation value `-N + sum_t series_t / baseline_t`.
pub fn piv(series: &[f64], baseline: &[f64]) -> Result<f64, AnalysisError> {
    if series.len() != baseline.len() {
        return Err(AnalysisError::LengthMismatch { series: series.len(), baseline: baseline.len() });
    }
    if series.is_empty() {
        return Err(AnalysisError::EmptySeries);
    }
    let mut total = -(series.len() as f64);
    for (t, (&f, &b)) in series.iter().zip(baseline).enumerate() {
        if b.is_nan() || b <= BASELINE_EPSILON {
            return Err(AnalysisError::DegenerateBaseline { period: t + 1, value: b });
        }
        total += f / b;
    }
    Ok(total)
}

/// Pointwise mean of the runs' mean-fitness series, cut to `periods`.
pub fn average_series(runs: &[RunSeries], periods: usize) -> Result<Vec<f64>, AnalysisError> {
    if runs.is_empty() {
        return Err(AnalysisError::EmptySeries);
    }
    let mut sum = vec![0.0; periods];
    for run in runs {
        let head = truncated(&run.mean_fitness, periods)?;
        for (s, &f) in sum.iter_mut().zip(head) {
            *s += f;
        }
    }
    let n = runs.len() as f64;
    Ok(sum.into_iter().map(|s| s / n).collect())
}

fn truncated(series: &[f64], periods: usize) -> Result<&[f64], AnalysisError> {
    if periods == 0 {
        return Err(AnalysisError::EmptySeries);
    }
    series.get(..periods).ok_or(AnalysisError::SeriesTooShort { len: series.len(), periods })
}

/// All runs of one `{C, p}` grid cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSeries {
    pub c: f64,
    pub p: f64,
    pub runs: Vec<RunSeries>,
}

impl CellSeries {
    pub fn is_baseline(&self) -> bool {
        self.c == 1.0 && self.p == 1.0
    }
}

/// How PIV is aggregated over the runs of a cell.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PivMode {
    /// PIV of the run-averaged series against the run-averaged baseline.
    #[default]
    AveragedSeries,
    /// Mean over runs of each run's PIV against the run-averaged baseline.
    PerRun,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandscapePoint {
    #[serde(rename = "C")]
    pub c: f64,
    pub p: f64,
    /// Mean time to threshold; censored runs count at the run length.
    pub mean_ttt: f64,
    pub censored_runs: usize,
    pub log10_mean_ttt: f64,
    pub piv: f64,
    pub runs: usize,
}

impl LandscapePoint {
    pub fn fully_censored(&self) -> bool {
        self.censored_runs == self.runs
    }
}

/// Value every cell, using the `{C=1, p=1}` cell as the PIV baseline.
pub fn build_landscape(
    cells: &[CellSeries],
    params: &DiscountParams,
    mode: PivMode,
) -> Result<Vec<LandscapePoint>, AnalysisError> {
    let base = cells.iter().find(|c| c.is_baseline()).ok_or(AnalysisError::MissingBaseline)?;
    let baseline = average_series(&base.runs, params.periods)?;
    cells.iter().map(|cell| landscape_point(cell, &baseline, params, mode)).collect()
}

fn landscape_point(
    cell: &CellSeries,
    baseline: &[f64],
    params: &DiscountParams,
    mode: PivMode,
) -> Result<LandscapePoint, AnalysisError> {
    if cell.runs.is_empty() {
        return Err(AnalysisError::EmptyCell { c: cell.c, p: cell.p });
    }
    let mut ttt_total = 0usize;
    let mut censored = 0usize;
    for run in &cell.runs {
        let ttt = time_to_threshold(truncated(&run.mean_fitness, params.periods)?, params.tau);
        ttt_total += ttt.value_or_bound();
        censored += usize::from(ttt.is_censored());
    }
    let runs = cell.runs.len();
    let mean_ttt = ttt_total as f64 / runs as f64;
    let piv_value = match mode {
        PivMode::AveragedSeries => piv(&average_series(&cell.runs, params.periods)?, baseline)?,
        PivMode::PerRun => {
            let mut total = 0.0;
            for run in &cell.runs {
                total += piv(truncated(&run.mean_fitness, params.periods)?, baseline)?;
            }
            total / runs as f64
        }
    };
    Ok(LandscapePoint {
        c: cell.c,
        p: cell.p,
        mean_ttt,
        censored_runs: censored,
        log10_mean_ttt: mean_ttt.log10(),
        piv: piv_value,
        runs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    C,
    P,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::C => "C",
            Axis::P => "p",
        }
    }

    pub fn parse(s: &str) -> Option<Axis> {
        match s {
            "C" => Some(Axis::C),
            "p" => Some(Axis::P),
            _ => None,
        }
    }

    fn fixed_and_free(self, point: &LandscapePoint) -> (f64, f64) {
        match self {
            Axis::C => (point.c, point.p),
            Axis::P => (point.p, point.c),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Valuation {
    /// Lower mean time to threshold is better.
    MeanTtt,
    /// Higher PIV is better.
    Piv,
}

impl Valuation {
    pub fn of(self, point: &LandscapePoint) -> f64 {
        match self {
            Valuation::MeanTtt => point.mean_ttt,
            Valuation::Piv => point.piv,
        }
    }

    fn better(self, candidate: f64, incumbent: f64) -> bool {
        match self {
            Valuation::MeanTtt => candidate < incumbent,
            Valuation::Piv => candidate > incumbent,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RidgePoint {
    pub fixed_axis: Axis,
    pub fixed_value: f64,
    pub opt_value: f64,
    pub valuation: f64,
}

/// For every value of `fixed_axis`, the value of the other parameter with the
/// best valuation. Ties go to the smaller parameter value.
pub fn optima_ridge(landscape: &[LandscapePoint], fixed_axis: Axis, valuation: Valuation) -> Vec<RidgePoint> {
    let mut lines: BTreeMap<OrdF64, Vec<(f64, f64)>> = BTreeMap::new();
    for point in landscape {
        let (fixed, free) = fixed_axis.fixed_and_free(point);
        lines.entry(OrdF64(fixed)).or_default().push((free, valuation.of(point)));
    }
    lines
        .into_iter()
        .map(|(OrdF64(fixed_value), mut line)| {
            line.sort_by(|a, b| a.0.total_cmp(&b.0));
            let (opt_value, best) = line
                .into_iter()
                .reduce(|best, cand| if valuation.better(cand.1, best.1) { cand } else { best })
                .expect("every line has a point");
            RidgePoint { fixed_axis, fixed_value, opt_value, valuation: best }
        })
        .collect()
}

/// The single best cell of a landscape; ties go to smaller C, then smaller p.
pub fn global_optimum(landscape: &[LandscapePoint], valuation: Valuation) -> Option<&LandscapePoint> {
    let mut sorted: Vec<&LandscapePoint> = landscape.iter().collect();
    sorted.sort_by(|a, b| a.c.total_cmp(&b.c).then(a.p.total_cmp(&b.p)));
    sorted
        .into_iter()
        .reduce(|best, cand| if valuation.better(valuation.of(cand), valuation.of(best)) { cand } else { best })
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}
