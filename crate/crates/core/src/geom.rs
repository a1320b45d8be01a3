//! Positions and TX/RX link geometry.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in 3-D metric Cartesian coordinates (meters).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinitePosition(self.x, self.y, self.z))
        }
    }

    /// Euclidean distance. Symmetric bit-for-bit in its two arguments.
    pub fn distance(&self, other: &Position) -> f64 {
        let (dx, dy, dz) = (other.x - self.x, other.y - self.y, other.z - self.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    /// Horizontal (x/y-plane) distance.
    pub fn distance_2d(&self, other: &Position) -> f64 {
        let (dx, dy) = (other.x - self.x, other.y - self.y);
        (dx * dx + dy * dy).sqrt()
    }

    pub fn offset(&self, dx: f64, dy: f64, dz: f64) -> Position {
        Position::new(self.x + dx, self.y + dy, self.z + dz)
    }
}

impl From<[f64; 3]> for Position {
    fn from(p: [f64; 3]) -> Self {
        Position::new(p[0], p[1], p[2])
    }
}

/// TX and RX positions of one link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkGeometry {
    pub tx: Position,
    pub rx: Position,
}

impl LinkGeometry {
    pub fn new(tx: Position, rx: Position) -> Result<Self> {
        let g = Self { tx, rx };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        self.tx.check_finite()?;
        self.rx.check_finite()?;
        if self.tx == self.rx {
            return Err(Error::CoincidentEndpoints);
        }
        Ok(())
    }

    /// The same link seen from the other end.
    pub fn swapped(&self) -> Self {
        Self {
            tx: self.rx,
            rx: self.tx,
        }
    }

    pub fn distance_3d(&self) -> f64 {
        self.tx.distance(&self.rx)
    }

    pub fn distance_2d(&self) -> f64 {
        self.tx.distance_2d(&self.rx)
    }
}
