//! Small value types shared by every layer: trade direction and the per-day
//! decision a signal model emits.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Side of a daytime position, or the observed sign of a session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    Long,
    Short,
}

impl Direction {
    /// `+1` for long, `-1` for short.
    pub fn sign(self) -> i8 {
        match self {
            Direction::Long => 1,
            Direction::Short => -1,
        }
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.sign())
    }

    /// Maps a strictly positive value to long and anything else (including
    /// zero) to short.
    pub fn from_positive(value: f64) -> Self {
        if value > 0.0 {
            Direction::Long
        } else {
            Direction::Short
        }
    }

    pub fn from_sign(sign: i64) -> Option<Self> {
        match sign {
            1 => Some(Direction::Long),
            -1 => Some(Direction::Short),
            _ => None,
        }
    }

    /// 1.0 for long, 0.0 for short; the encoding used by the classifiers.
    pub fn as_unit(self) -> f64 {
        match self {
            Direction::Long => 1.0,
            Direction::Short => 0.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Direction::Long => Direction::Short,
            Direction::Short => Direction::Long,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.sign())
    }
}

/// What a strategy does on one session.
///
/// A scale of zero means the position is closed; the direction is then kept
/// only as a diagnostic and contributes neither return nor exposure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub direction: Direction,
    pub scale: f64,
}

impl Decision {
    pub fn new(direction: Direction, scale: f64) -> Self {
        debug_assert!((0.0..=1.0).contains(&scale), "scale {scale} outside [0, 1]");
        Self {
            direction,
            scale: scale.clamp(0.0, 1.0),
        }
    }

    pub fn long() -> Self {
        Self::new(Direction::Long, 1.0)
    }

    pub fn short() -> Self {
        Self::new(Direction::Short, 1.0)
    }

    pub fn full(direction: Direction) -> Self {
        Self::new(direction, 1.0)
    }

    pub fn closed(direction: Direction) -> Self {
        Self::new(direction, 0.0)
    }

    pub fn is_open(&self) -> bool {
        self.scale > 0.0
    }

    /// Signed exposure: `direction × scale`.
    pub fn position(&self) -> f64 {
        self.direction.as_f64() * self.scale
    }

    /// The direction when a position is held, `None` when closed. This is the
    /// form the classification metrics consume (closed days abstain).
    pub fn call(&self) -> Option<Direction> {
        self.is_open().then_some(self.direction)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_maps_to_short() {
        assert_eq!(Direction::from_positive(0.0), Direction::Short);
        assert_eq!(Direction::from_positive(1e-12), Direction::Long);
    }

    #[test]
    fn closed_decision_has_no_position() {
        let d = Decision::closed(Direction::Long);
        assert_eq!(d.position(), 0.0);
        assert_eq!(d.call(), None);
        assert_eq!(Decision::short().position(), -1.0);
    }
}
