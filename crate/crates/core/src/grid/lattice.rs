//! Coordinates of the flat equilateral triangular lattice.
//!
//! Lattice points are `i·a1 + j·a2` with `a1 = (1, 0)` and `a2 = (1/2, √3/2)`,
//! shifted so the centroid of the up-cell `(0, 0)` sits at the origin.
//! Side classes follow edge direction: side 1 is horizontal, side 2 runs along
//! `a2`, side 3 along `a2 - a1`. Two cells sharing an edge therefore share its
//! side index.

use serde::{Deserialize, Serialize};

pub const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Orientation {
    Up,
    Down,
}

/// A cell of the flat lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub i: i64,
    pub j: i64,
    pub orientation: Orientation,
}

impl Cell {
    pub const ORIGIN: Cell = Cell { i: 0, j: 0, orientation: Orientation::Up };

    pub fn up(i: i64, j: i64) -> Cell {
        Cell { i, j, orientation: Orientation::Up }
    }

    pub fn down(i: i64, j: i64) -> Cell {
        Cell { i, j, orientation: Orientation::Down }
    }
}

pub type LatticePoint = (i64, i64);

pub fn point_position((i, j): LatticePoint) -> [f64; 2] {
    let x = i as f64 + 0.5 * j as f64 - 0.5;
    let y = 0.5 * SQRT3 * j as f64 - SQRT3 / 6.0;
    [x, y]
}

/// Corners of a cell; entry `k - 1` is the corner opposite side `k`.
pub fn cell_corners(cell: Cell) -> [LatticePoint; 3] {
    let Cell { i, j, orientation } = cell;
    match orientation {
        Orientation::Up => [(i, j + 1), (i + 1, j), (i, j)],
        Orientation::Down => [(i + 1, j), (i, j + 1), (i + 1, j + 1)],
    }
}

/// Recovers the cell spanned by three lattice points, if they span one.
pub fn cell_from_points(points: [LatticePoint; 3]) -> Option<Cell> {
    let si: i64 = points.iter().map(|p| p.0).sum();
    let sj: i64 = points.iter().map(|p| p.1).sum();
    let cell = match (si.rem_euclid(3), sj.rem_euclid(3)) {
        (1, 1) => Cell::up((si - 1) / 3, (sj - 1) / 3),
        (2, 2) => Cell::down((si - 2) / 3, (sj - 2) / 3),
        _ => return None,
    };
    let mut want = cell_corners(cell);
    let mut got = points;
    want.sort_unstable();
    got.sort_unstable();
    (want == got).then_some(cell)
}

/// The cell on the other side of side index `k` (zero-based `k_idx`), found by
/// reflecting the opposite corner through the shared edge.
pub fn reflected_neighbor(cell: Cell, k_idx: usize) -> Cell {
    let c = cell_corners(cell);
    let a = c[(k_idx + 1) % 3];
    let b = c[(k_idx + 2) % 3];
    let far = (a.0 + b.0 - c[k_idx].0, a.1 + b.1 - c[k_idx].1);
    cell_from_points([a, b, far]).expect("reflection of a lattice cell is a lattice cell")
}

pub fn cell_centroid(cell: Cell) -> [f64; 2] {
    let c = cell_corners(cell).map(point_position);
    [(c[0][0] + c[1][0] + c[2][0]) / 3.0, (c[0][1] + c[1][1] + c[2][1]) / 3.0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_centroid_is_zero() {
        let c = cell_centroid(Cell::ORIGIN);
        assert!(c[0].abs() < 1e-15 && c[1].abs() < 1e-15);
    }

    #[test]
    fn reflection_is_involutive_and_flips_orientation() {
        for cell in [Cell::up(0, 0), Cell::down(3, -2), Cell::up(-5, 7)] {
            for k in 0..3 {
                let n = reflected_neighbor(cell, k);
                assert_ne!(n.orientation, cell.orientation);
                assert_eq!(reflected_neighbor(n, k), cell);
            }
        }
    }

    #[test]
    fn cell_from_points_rejects_non_cells() {
        assert!(cell_from_points([(0, 0), (1, 0), (2, 0)]).is_none());
        assert_eq!(cell_from_points(cell_corners(Cell::down(2, 1))), Some(Cell::down(2, 1)));
    }

    #[test]
    fn corners_are_unit_distance_apart() {
        for cell in [Cell::up(1, 2), Cell::down(-1, 0)] {
            let p = cell_corners(cell).map(point_position);
            for a in 0..3 {
                let b = (a + 1) % 3;
                let d = ((p[a][0] - p[b][0]).powi(2) + (p[a][1] - p[b][1]).powi(2)).sqrt();
                assert!((d - 1.0).abs() < 1e-12);
            }
        }
    }
}
