use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("action index {0} is outside 0..729")]
pub struct ActionIndexError(pub usize);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("lattice {width}x{height} does not hold {agents} agents")]
    LatticeMismatch { width: usize, height: usize, agents: usize },
    #[error("lattice must be at least 1x1")]
    EmptyLattice,
    #[error("{name} = {value} is outside [0, 1]")]
    FractionOutOfRange { name: &'static str, value: f64 },
    #[error("{name} = {value} must be finite and non-negative")]
    InvalidParameter { name: &'static str, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("discount rate {0} is outside (0, 1]")]
    RateOutOfRange(f64),
    #[error("series is empty")]
    EmptySeries,
    #[error("series length {series} does not match baseline length {baseline}")]
    LengthMismatch { series: usize, baseline: usize },
    #[error("baseline value {value} at period {period} is not above the degeneracy guard")]
    DegenerateBaseline { period: usize, value: f64 },
    #[error("series has {len} periods, fewer than the {periods} requested")]
    SeriesTooShort { len: usize, periods: usize },
    #[error("no {{C=1, p=1}} cell present to serve as the PIV baseline")]
    MissingBaseline,
    #[error("cell {{C={c}, p={p}}} has no runs")]
    EmptyCell { c: f64, p: f64 },
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("grid is invalid: {0}")]
    InvalidGrid(String),
    #[error("cell {{C={c}, p={p}}}: {source}")]
    Cell {
        c: f64,
        p: f64,
        #[source]
        source: ConfigError,
    },
    #[error("could not build worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Format(String),
}
