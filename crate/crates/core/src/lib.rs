//! Creators and imitators evolving actions on a toroidal lattice, plus the
//! discounting analyses used to value the resulting mean-fitness series.
//!
//! The crate is organised bottom-up:
//!
//! * [`action`] and [`fitness`]: the 729-action space and its scoring.
//! * [`agent`]: invention, adoption and bias learning for one agent.
//! * [`world`]: the lattice, lazy imitation and the synchronous step.
//! * [`analysis`]: NPV, time-to-threshold, PIV, landscapes and ridges.
//! * [`sweep`]: deterministic multi-run grids over `{C, p}`.
//! * [`store`]: the CSV/JSON formats used on disk.

pub mod action;
pub mod agent;
pub mod analysis;
pub mod error;
pub mod fitness;
pub mod rng;
pub mod store;
pub mod sweep;
pub mod world;

pub use action::{Action, BodyPart, Position, ACTION_COUNT};
pub use agent::{Agent, AgentRole, Behavior, BiasState};
pub use analysis::{LandscapePoint, Ttt};
pub use error::{ActionIndexError, AnalysisError, ConfigError, StoreError, SweepError};
pub use fitness::{fitness, FitnessTable, FitnessVariant};
pub use sweep::{GridSpec, SweepResult};
pub use world::{run_simulation, RunSeries, World, WorldConfig};
