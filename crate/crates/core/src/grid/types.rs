//! Small value types shared by the grid, the walker and the dynamics.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Side index of a triangle, in `{1, 2, 3}` with cyclic arithmetic.
///
/// Side `k` of a triangle joins its corners `k + 1` and `k + 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Side(u8);

impl Side {
    pub const ONE: Side = Side(1);
    pub const TWO: Side = Side(2);
    pub const THREE: Side = Side(3);
    pub const ALL: [Side; 3] = [Side::ONE, Side::TWO, Side::THREE];

    pub fn new(value: u8) -> Option<Side> {
        (1..=3).contains(&value).then_some(Side(value))
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Zero-based array index.
    pub fn idx(self) -> usize {
        (self.0 - 1) as usize
    }

    pub fn from_idx(idx: usize) -> Side {
        Side((idx % 3) as u8 + 1)
    }

    /// `k + 1` (mod 3).
    pub fn next(self) -> Side {
        Side::from_idx(self.idx() + 1)
    }

    /// `k - 1` (mod 3).
    pub fn prev(self) -> Side {
        Side::from_idx(self.idx() + 2)
    }
}

impl TryFrom<u8> for Side {
    type Error = String;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        Side::new(value).ok_or_else(|| format!("side index {value} not in 1..=3"))
    }
}

impl From<Side> for u8 {
    fn from(side: Side) -> u8 {
        side.0
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn flip(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }
}

/// A triangle label `(s1, s2, s3)`: the spin component the triangle carries on each side.
///
/// Only the four labels with `s1 == s2` are valid:
/// `(↑,↑,↑)`, `(↓,↓,↓)`, `(↑,↑,↓)`, `(↓,↓,↑)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TriLabel([Spin; 3]);

impl TriLabel {
    pub const UP: TriLabel = TriLabel([Spin::Up; 3]);
    pub const DOWN: TriLabel = TriLabel([Spin::Down; 3]);

    /// The whole label set, in a fixed order.
    pub const ALL: [TriLabel; 4] = [
        TriLabel([Spin::Up, Spin::Up, Spin::Up]),
        TriLabel([Spin::Down, Spin::Down, Spin::Down]),
        TriLabel([Spin::Up, Spin::Up, Spin::Down]),
        TriLabel([Spin::Down, Spin::Down, Spin::Up]),
    ];

    /// Returns `None` when the triple is not one of the four admissible labels.
    pub fn new(s1: Spin, s2: Spin, s3: Spin) -> Option<TriLabel> {
        (s1 == s2).then_some(TriLabel([s1, s2, s3]))
    }

    pub fn from_spins(spins: [Spin; 3]) -> Option<TriLabel> {
        TriLabel::new(spins[0], spins[1], spins[2])
    }

    pub fn spin(self, side: Side) -> Spin {
        self.0[side.idx()]
    }

    pub fn spins(self) -> [Spin; 3] {
        self.0
    }

    /// Compact text form, e.g. `"uud"`.
    pub fn code(self) -> String {
        self.0
            .iter()
            .map(|s| match s {
                Spin::Up => 'u',
                Spin::Down => 'd',
            })
            .collect()
    }
}

impl fmt::Display for TriLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code())
    }
}

/// Identifier of a triangle. Never reused within a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TriangleId(pub(crate) u32);

impl TriangleId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn raw(self) -> u32 {
        self.0
    }
}

impl fmt::Display for TriangleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Identifier of a corner of the complex. Never reused within a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexId(pub(crate) u32);

impl VertexId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn raw(self) -> u32 {
        self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The side-`side` component carried by triangle `tri`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slot {
    pub tri: TriangleId,
    pub side: Side,
}

impl Slot {
    pub fn new(tri: TriangleId, side: Side) -> Slot {
        Slot { tri, side }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn side_arithmetic_wraps() {
        assert_eq!(Side::ONE.prev(), Side::THREE);
        assert_eq!(Side::THREE.next(), Side::ONE);
        for k in Side::ALL {
            assert_eq!(k.next().prev(), k);
            assert_eq!(k.next().next().next(), k);
        }
        assert!(Side::new(0).is_none());
        assert!(Side::new(4).is_none());
    }

    #[test]
    fn label_set_is_exactly_four() {
        let spins = [Spin::Up, Spin::Down];
        let mut valid = 0;
        for a in spins {
            for b in spins {
                for c in spins {
                    if let Some(l) = TriLabel::new(a, b, c) {
                        assert!(TriLabel::ALL.contains(&l));
                        valid += 1;
                    }
                }
            }
        }
        assert_eq!(valid, 4);
    }

    #[test]
    fn spin_flip_is_involution() {
        assert_eq!(Spin::Up.flip().flip(), Spin::Up);
        assert_eq!(Spin::Down.flip(), Spin::Up);
    }
}
