//! Action fitness and its two readings of the head term.

use serde::{Deserialize, Serialize};

use crate::action::{Action, ACTION_COUNT};

/// Which head term the fitness function uses.
///
/// Both variants score `m + 1.5 * (s_a + s_t)` for movement `m` and the
/// arm/leg symmetry flags. They differ only in the head term:
///
/// * `Verbatim`: `+ 2 * (1 - m_h)`, rewarding a moving head (max 11).
/// * `HeadStationaryReward`: `+ 2 * m_h`, rewarding a still head (max 10).
///
/// `m_h` is 1 when the head is neutral.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitnessVariant {
    Verbatim,
    #[default]
    HeadStationaryReward,
}

impl FitnessVariant {
    pub const ALL: [FitnessVariant; 2] = [FitnessVariant::Verbatim, FitnessVariant::HeadStationaryReward];

    pub fn name(self) -> &'static str {
        match self {
            FitnessVariant::Verbatim => "verbatim",
            FitnessVariant::HeadStationaryReward => "head-stationary-reward",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == s)
    }
}

impl std::fmt::Display for FitnessVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

pub fn fitness(action: &Action, variant: FitnessVariant) -> f64 {
    let m = f64::from(action.movement_count());
    let sym = f64::from(action.symmetry_count());
    let head_still = if action.head_stationary() { 1.0 } else { 0.0 };
    let head_term = match variant {
        FitnessVariant::Verbatim => 2.0 * (1.0 - head_still),
        FitnessVariant::HeadStationaryReward => 2.0 * head_still,
    };
    m + 1.5 * sym + head_term
}

/// Fitness of every action, indexed by [`Action::encode`].
#[derive(Clone, Debug)]
pub struct FitnessTable {
    variant: FitnessVariant,
    values: Box<[f64; ACTION_COUNT]>,
}

impl FitnessTable {
    pub fn new(variant: FitnessVariant) -> Self {
        let mut values = Box::new([0.0; ACTION_COUNT]);
        for (slot, action) in values.iter_mut().zip(Action::all()) {
            *slot = fitness(&action, variant);
        }
        FitnessTable { variant, values }
    }

    pub fn variant(&self) -> FitnessVariant {
        self.variant
    }

    #[inline]
    pub fn get(&self, action: &Action) -> f64 {
        self.values[action.encode()]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::{BodyPart, Position};

    fn all_up_head_still() -> Action {
        Action::new([Position::ActiveUp; 6]).with(BodyPart::Head, Position::Neutral)
    }

    #[test]
    fn immobility() {
        assert_eq!(fitness(&Action::NEUTRAL, FitnessVariant::Verbatim), 0.0);
        assert_eq!(fitness(&Action::NEUTRAL, FitnessVariant::HeadStationaryReward), 2.0);
    }

    #[test]
    fn symmetric_body_with_still_head() {
        let a = all_up_head_still();
        assert_eq!(fitness(&a, FitnessVariant::HeadStationaryReward), 10.0);
        assert_eq!(fitness(&a, FitnessVariant::Verbatim), 8.0);
    }

    #[test]
    fn hips_alone() {
        let a = Action::NEUTRAL.with(BodyPart::Hips, Position::ActiveUp);
        assert_eq!(fitness(&a, FitnessVariant::HeadStationaryReward), 3.0);
    }

    #[test]
    fn table_matches_direct_evaluation() {
        for variant in FitnessVariant::ALL {
            let table = FitnessTable::new(variant);
            for a in Action::all() {
                assert_eq!(table.get(&a).to_bits(), fitness(&a, variant).to_bits());
            }
        }
    }

    #[test]
    fn variant_names_round_trip() {
        for v in FitnessVariant::ALL {
            assert_eq!(FitnessVariant::parse(v.name()), Some(v));
        }
        assert_eq!(FitnessVariant::parse("nope"), None);
    }
}
