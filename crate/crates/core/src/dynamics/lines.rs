//! Nonzero slots of the untouched lattice, grouped by the straight lines rays
//! follow there, so a ray carrying nothing can jump to the next occupied cell.

use std::collections::BTreeSet;

use num_complex::Complex64;
use rustc_hash::FxHashMap as HashMap;

use crate::grid::{reflected_neighbor, Cell, Orientation, Side, Slot, Triangulation};
use crate::walker::Field;

type Step = (i64, i64);

/// Lattice translation of one ray hop: across side `outward`, then across side `k`.
pub fn ray_step(orientation: Orientation, outward: Side, k: Side) -> Step {
    let c = Cell { i: 0, j: 0, orientation };
    let n = reflected_neighbor(reflected_neighbor(c, outward.idx()), k.idx());
    debug_assert_eq!(n.orientation, orientation);
    (n.i, n.j)
}

fn line_of(cell: Cell, step: Step) -> (i64, i64) {
    (step.0 * cell.j - step.1 * cell.i, step.0 * cell.i + step.1 * cell.j)
}

type Key = (Orientation, Side, Side);

/// Valid for one merge phase. Every nonzero slot of a lattice cell beyond the
/// moved region must be present; stale entries for slots since zeroed are allowed.
#[derive(Debug, Default)]
pub struct LineIndex {
    built: bool,
    lines: HashMap<Key, HashMap<i64, BTreeSet<i64>>>,
}

impl LineIndex {
    fn insert(&mut self, cell: Cell, k: Side) {
        for outward in Side::ALL.into_iter().filter(|&j| j != k) {
            let step = ray_step(cell.orientation, outward, k);
            let (line, pos) = line_of(cell, step);
            self.lines.entry((cell.orientation, k, outward)).or_default().entry(line).or_default().insert(pos);
        }
    }

    fn build(&mut self, t: &Triangulation, f: &Field) {
        for (slot, _) in f.nonzero_slots() {
            if t.is_beyond_moves(slot.tri) {
                let cell = t.cell(slot.tri).expect("lattice cell");
                self.insert(cell, slot.side);
            }
        }
        self.built = true;
    }

    /// Records a nonzero write to `(cell, k)` beyond the moved region.
    pub fn note(&mut self, cell: Cell, k: Side) {
        if self.built {
            self.insert(cell, k);
        }
    }

    /// First cell strictly ahead of `cell` on its ray whose side-`k` slot is nonzero.
    pub fn next_occupied(&mut self, t: &Triangulation, f: &Field, cell: Cell, outward: Side, k: Side) -> Option<Cell> {
        if !self.built {
            self.build(t, f);
        }
        let step = ray_step(cell.orientation, outward, k);
        let len2 = step.0 * step.0 + step.1 * step.1;
        let (line, pos) = line_of(cell, step);
        let positions = self.lines.get(&(cell.orientation, k, outward))?.get(&line)?;
        for &p in positions.range(pos + 1..) {
            let n = (p - pos) / len2;
            debug_assert_eq!((p - pos) % len2, 0);
            let target = Cell { i: cell.i + n * step.0, j: cell.j + n * step.1, orientation: cell.orientation };
            let occupied = t.flat_cell(target).is_some_and(|tri| f.get(Slot::new(tri, k)) != Complex64::new(0.0, 0.0));
            if occupied {
                return Some(target);
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ray_steps_are_primitive_lattice_vectors() {
        for o in [Orientation::Up, Orientation::Down] {
            for k in Side::ALL {
                for j in Side::ALL.into_iter().filter(|&j| j != k) {
                    let (a, b) = ray_step(o, j, k);
                    assert!((a, b) != (0, 0));
                    assert!(a.abs() <= 1 && b.abs() <= 1, "step ({a}, {b})");
                }
            }
        }
    }
}
