use rustc_hash::FxHashSet;

use num_complex::Complex64;

use super::lines::{ray_step, LineIndex};
use crate::error::{Error, Result};
use crate::grid::{Cell, Side, Slot, TriangleId, Triangulation};
use crate::walker::Field;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// The six internal slots of a canonical cycle, in ray order: members in
/// canonical order, internal sides ascending. Each entry is `(slot, external side)`.
pub fn internal_slots(cycle: [TriangleId; 3]) -> [(Slot, Side); 6] {
    let mut out = [(Slot::new(cycle[0], Side::ONE), Side::ONE); 6];
    for (i, &x) in cycle.iter().enumerate() {
        let j = Triangulation::external_side_of(i);
        let mut internal = [j.next(), j.prev()];
        internal.sort();
        for (n, k) in internal.into_iter().enumerate() {
            out[2 * i + n] = (Slot::new(x, k), j);
        }
    }
    out
}

/// Empties the internal edges of `cycle` by pushing every value on each ray one
/// position outward.
///
/// The ray for member `x` with external side `j` and internal side `k` is
/// `p0 = x`, `p(n+1) = neighbor(neighbor(p(n), j), k)`; its side-`k` slots shift
/// simultaneously. Rays are applied one after another in [`internal_slots`]
/// order. `cycle` must be canonical.
pub fn translate_out(t: &mut Triangulation, f: &mut Field, cycle: [TriangleId; 3]) -> Result<()> {
    translate_out_indexed(t, f, cycle, &mut LineIndex::default())
}

/// [`translate_out`] sharing a line index across the merges of one phase.
pub(crate) fn translate_out_indexed(
    t: &mut Triangulation,
    f: &mut Field,
    cycle: [TriangleId; 3],
    index: &mut LineIndex,
) -> Result<()> {
    for (slot, j) in internal_slots(cycle) {
        shift_ray(t, f, slot, j, index)?;
    }
    for (slot, _) in internal_slots(cycle) {
        if f.get(slot) != ZERO {
            return Err(Error::Invariant(format!(
                "internal slot ({}, {}) still holds amplitude after translation",
                slot.tri, slot.side
            )));
        }
    }
    Ok(())
}

fn shift_ray(t: &mut Triangulation, f: &mut Field, start: Slot, outward: Side, index: &mut LineIndex) -> Result<()> {
    let k = start.side;
    let mut visited = FxHashSet::default();
    let mut visit = |tri: TriangleId| {
        if visited.insert(tri) {
            Ok(())
        } else {
            Err(Error::RayRevisit { start: start.tri, side: k, repeated: tri })
        }
    };
    visit(start.tri)?;

    let mut p = start.tri;
    let mut carry = f.get(start);
    f.set(start, ZERO);
    while carry != ZERO || !t.is_outside_dirty(p) {
        if t.is_beyond_moves(p) {
            let cell = t.cell(p).expect("lattice cell");
            return shift_lattice_tail(t, f, cell, outward, k, carry, index);
        }
        let across = t.neighbor_mat(p, outward)?;
        visit(across)?;
        p = t.neighbor_mat(across, k)?;
        visit(p)?;
        let slot = Slot::new(p, k);
        let displaced = f.get(slot);
        if carry != ZERO || displaced != ZERO {
            f.set(slot, carry);
        }
        if carry != ZERO {
            t.mark_dirty(p);
            if t.is_beyond_moves(p) {
                index.note(t.cell(p).expect("lattice cell"), k);
            }
        }
        carry = displaced;
    }
    Ok(())
}

/// Continues a ray through plain lattice, where it is a fixed translation.
/// With nothing carried it jumps to the next occupied cell on its line, and it
/// ends once none is left. Cells are only materialized to receive a nonzero value.
fn shift_lattice_tail(
    t: &mut Triangulation,
    f: &mut Field,
    mut cell: Cell,
    outward: Side,
    k: Side,
    mut carry: Complex64,
    index: &mut LineIndex,
) -> Result<()> {
    let (di, dj) = ray_step(cell.orientation, outward, k);
    loop {
        if carry == ZERO {
            match index.next_occupied(t, f, cell, outward, k) {
                Some(next) => cell = next,
                None => return Ok(()),
            }
        } else {
            cell = Cell { i: cell.i + di, j: cell.j + dj, orientation: cell.orientation };
        }
        let existing = t.flat_cell(cell);
        let displaced = existing.map_or(ZERO, |tri| f.get(Slot::new(tri, k)));
        if carry != ZERO {
            let tri = match existing {
                Some(tri) => tri,
                None => t.materialize_cell(cell)?,
            };
            f.set(Slot::new(tri, k), carry);
            t.mark_dirty(tri);
            index.note(cell, k);
        } else if let Some(tri) = existing.filter(|_| displaced != ZERO) {
            f.set(Slot::new(tri, k), ZERO);
        }
        carry = displaced;
    }
}
