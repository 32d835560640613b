//! Agents and their individual behaviours: invent, evaluate-and-adopt, learn.
//!
//! The agent's network is represented by what it computes: a movement count,
//! the two symmetry flags, and two learned biases that steer invention.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::action::{Action, BodyPart, Position};
use crate::fitness::{fitness, FitnessTable, FitnessVariant};

/// Per-part probability that invention changes a body part.
pub const DEFAULT_CHANGE_PROBABILITY: f64 = 1.0 / 6.0;
pub const DEFAULT_BIAS_DELTA: f64 = 0.1;
pub const INITIAL_BIAS: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AgentRole {
    Creator,
    Imitator,
}

/// Learned invention biases, each a probability in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasState {
    /// Chance that a changed part lands on an active position.
    pub movement: f64,
    /// Chance that a changed limb copies its active counterpart.
    pub symmetry: f64,
}

impl Default for BiasState {
    fn default() -> Self {
        BiasState { movement: INITIAL_BIAS, symmetry: INITIAL_BIAS }
    }
}

impl BiasState {
    pub fn new(movement: f64, symmetry: f64) -> Self {
        BiasState { movement: movement.clamp(0.0, 1.0), symmetry: symmetry.clamp(0.0, 1.0) }
    }

    /// Nudge both biases toward (if `fitter`) or away from the direction in
    /// which `evaluated` differs from `reference`.
    pub fn update(&mut self, evaluated: &Action, reference: &Action, fitter: bool, delta: f64) {
        let dm = sign(i64::from(evaluated.movement_count()) - i64::from(reference.movement_count()));
        let ds = sign(i64::from(evaluated.symmetry_count()) - i64::from(reference.symmetry_count()));
        let dir = if fitter { 1.0 } else { -1.0 };
        self.movement = (self.movement + dir * delta * dm).clamp(0.0, 1.0);
        self.symmetry = (self.symmetry + dir * delta * ds).clamp(0.0, 1.0);
    }
}

fn sign(x: i64) -> f64 {
    match x.cmp(&0) {
        std::cmp::Ordering::Less => -1.0,
        std::cmp::Ordering::Equal => 0.0,
        std::cmp::Ordering::Greater => 1.0,
    }
}

/// Parameters shared by every agent in a run.
#[derive(Clone, Debug)]
pub struct Behavior {
    pub table: FitnessTable,
    pub bias_delta: f64,
    pub change_probability: f64,
}

impl Behavior {
    pub fn new(variant: FitnessVariant) -> Self {
        Behavior {
            table: FitnessTable::new(variant),
            bias_delta: DEFAULT_BIAS_DELTA,
            change_probability: DEFAULT_CHANGE_PROBABILITY,
        }
    }

    pub fn with_bias_delta(mut self, delta: f64) -> Self {
        self.bias_delta = delta;
        self
    }

    pub fn with_change_probability(mut self, p: f64) -> Self {
        self.change_probability = p;
        self
    }

    pub fn variant(&self) -> FitnessVariant {
        self.table.variant()
    }
}

impl Default for Behavior {
    fn default() -> Self {
        Behavior::new(FitnessVariant::default())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub id: usize,
    pub role: AgentRole,
    current: Action,
    current_fitness: f64,
    pub bias: BiasState,
}

impl Agent {
    /// A fresh agent standing still, with uninformed biases.
    pub fn new(id: usize, role: AgentRole, variant: FitnessVariant) -> Self {
        Agent::with_action(id, role, Action::NEUTRAL, variant)
    }

    pub fn with_action(id: usize, role: AgentRole, action: Action, variant: FitnessVariant) -> Self {
        Agent { id, role, current: action, current_fitness: fitness(&action, variant), bias: BiasState::default() }
    }

    pub fn current(&self) -> Action {
        self.current
    }

    pub fn current_fitness(&self) -> f64 {
        self.current_fitness
    }

    pub fn is_creator(&self) -> bool {
        self.role == AgentRole::Creator
    }

    /// Propose a variation of the current action. The agent is not modified.
    ///
    /// Each part changes independently with `behavior.change_probability`,
    /// always to a position different from its current one. A changed part
    /// goes active with probability `bias.movement` (neutral is only an option
    /// when the part is currently active). When a neutral limb goes active
    /// and its counterpart is active, it copies the counterpart with
    /// probability `bias.symmetry`; otherwise the active position is uniform.
    pub fn invent<R: Rng + ?Sized>(&self, behavior: &Behavior, rng: &mut R) -> Action {
        let origin = self.current;
        let mut candidate = origin;
        for part in BodyPart::ALL {
            if !rng.random_bool(behavior.change_probability) {
                continue;
            }
            let from = origin.get(part);
            let to = if from.is_active() {
                if rng.random_bool(self.bias.movement) {
                    from.opposite_active()
                } else {
                    Position::Neutral
                }
            } else {
                let partner = part.counterpart().map(|c| origin.get(c)).filter(|p| p.is_active());
                match partner {
                    Some(p) if rng.random_bool(self.bias.symmetry) => p,
                    _ => {
                        if rng.random_bool(0.5) {
                            Position::ActiveUp
                        } else {
                            Position::ActiveDown
                        }
                    }
                }
            };
            candidate.set(part, to);
        }
        candidate
    }

    /// Adopt `candidate` if strictly fitter. Biases are updated either way.
    pub fn evaluate_and_adopt(&mut self, candidate: Action, behavior: &Behavior) -> bool {
        let candidate_fitness = behavior.table.get(&candidate);
        let fitter = candidate_fitness > self.current_fitness;
        self.bias.update(&candidate, &self.current, fitter, behavior.bias_delta);
        if fitter {
            self.current = candidate;
            self.current_fitness = candidate_fitness;
        }
        fitter
    }

    /// Take an observed action whose fitness is already known to beat ours.
    pub(crate) fn adopt_observed(&mut self, action: Action, action_fitness: f64, behavior: &Behavior) {
        debug_assert!(action_fitness > self.current_fitness);
        self.bias.update(&action, &self.current, true, behavior.bias_delta);
        self.current = action;
        self.current_fitness = action_fitness;
    }
}
