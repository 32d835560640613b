//! Body parts, their positions, and the six-element action pattern.
//!
//! An action fixes the position of each of the six body parts. With three
//! positions per part there are exactly [`ACTION_COUNT`] = 729 actions, and
//! each one maps to a stable index in `0..729` (see [`Action::encode`]).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ActionIndexError;

/// Number of distinct actions (3^6).
pub const ACTION_COUNT: usize = 729;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Position {
    #[default]
    Neutral,
    ActiveUp,
    ActiveDown,
}

impl Position {
    pub const ALL: [Position; 3] = [Position::Neutral, Position::ActiveUp, Position::ActiveDown];

    /// Base-3 digit used by the action encoding.
    pub const fn digit(self) -> usize {
        match self {
            Position::Neutral => 0,
            Position::ActiveUp => 1,
            Position::ActiveDown => 2,
        }
    }

    const fn from_digit(d: usize) -> Position {
        match d {
            0 => Position::Neutral,
            1 => Position::ActiveUp,
            _ => Position::ActiveDown,
        }
    }

    pub const fn is_active(self) -> bool {
        !matches!(self, Position::Neutral)
    }

    /// The other active position. Neutral maps to itself.
    pub const fn opposite_active(self) -> Position {
        match self {
            Position::Neutral => Position::Neutral,
            Position::ActiveUp => Position::ActiveDown,
            Position::ActiveDown => Position::ActiveUp,
        }
    }
}

/// The six body parts, in encoding order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BodyPart {
    LeftArm,
    RightArm,
    LeftLeg,
    RightLeg,
    Head,
    Hips,
}

impl BodyPart {
    pub const ALL: [BodyPart; 6] =
        [BodyPart::LeftArm, BodyPart::RightArm, BodyPart::LeftLeg, BodyPart::RightLeg, BodyPart::Head, BodyPart::Hips];

    pub const fn index(self) -> usize {
        self as usize
    }

    /// Symmetric partner for limbs; `None` for head and hips.
    pub const fn counterpart(self) -> Option<BodyPart> {
        match self {
            BodyPart::LeftArm => Some(BodyPart::RightArm),
            BodyPart::RightArm => Some(BodyPart::LeftArm),
            BodyPart::LeftLeg => Some(BodyPart::RightLeg),
            BodyPart::RightLeg => Some(BodyPart::LeftLeg),
            BodyPart::Head | BodyPart::Hips => None,
        }
    }
}

/// One idea for an action: a position for every body part.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Action([Position; 6]);

impl Action {
    /// Every part neutral: the immobile starting action.
    pub const NEUTRAL: Action = Action([Position::Neutral; 6]);

    pub const fn new(positions: [Position; 6]) -> Self {
        Action(positions)
    }

    pub fn get(&self, part: BodyPart) -> Position {
        self.0[part.index()]
    }

    pub fn set(&mut self, part: BodyPart, position: Position) {
        self.0[part.index()] = position;
    }

    pub fn with(mut self, part: BodyPart, position: Position) -> Self {
        self.set(part, position);
        self
    }

    pub fn positions(&self) -> [Position; 6] {
        self.0
    }

    /// Base-3 index with `LeftArm` as the least significant digit and
    /// `Hips` as the most significant, Neutral = 0, ActiveUp = 1,
    /// ActiveDown = 2.
    pub fn encode(&self) -> usize {
        self.0.iter().rev().fold(0, |acc, p| acc * 3 + p.digit())
    }

    pub fn decode(index: usize) -> Result<Action, ActionIndexError> {
        if index >= ACTION_COUNT {
            return Err(ActionIndexError(index));
        }
        let mut positions = [Position::Neutral; 6];
        let mut rest = index;
        for slot in positions.iter_mut() {
            *slot = Position::from_digit(rest % 3);
            rest /= 3;
        }
        Ok(Action(positions))
    }

    /// All 729 actions in index order.
    pub fn all() -> impl Iterator<Item = Action> {
        (0..ACTION_COUNT).map(|i| Action::decode(i).expect("index in range"))
    }

    /// Number of parts not in the neutral position (all six counted).
    pub fn movement_count(&self) -> u32 {
        self.0.iter().filter(|p| p.is_active()).count() as u32
    }

    pub fn arms_symmetric(&self) -> bool {
        pair_symmetric(self.get(BodyPart::LeftArm), self.get(BodyPart::RightArm))
    }

    pub fn legs_symmetric(&self) -> bool {
        pair_symmetric(self.get(BodyPart::LeftLeg), self.get(BodyPart::RightLeg))
    }

    /// Number of symmetric limb pairs, 0..=2.
    pub fn symmetry_count(&self) -> u32 {
        self.arms_symmetric() as u32 + self.legs_symmetric() as u32
    }

    pub fn head_stationary(&self) -> bool {
        !self.get(BodyPart::Head).is_active()
    }
}

fn pair_symmetric(a: Position, b: Position) -> bool {
    a.is_active() && a == b
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in self.0 {
            let c = match p {
                Position::Neutral => '0',
                Position::ActiveUp => 'U',
                Position::ActiveDown => 'D',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}
