//! The walker's field over edge slots.
//!
//! Every edge `(v, k) ↔ (w, k)` carries a 2-spinor. Its up component is stored
//! in whichever of the two slots carries ↑ according to its triangle's label,
//! the down component in the other. The stored field is always the gauged
//! field `ψ̃`; the physical field `ψ = U_k† ψ̃` is computed on demand.

mod coins;

use std::io::Write;

use nalgebra::Vector2;
use num_complex::Complex64;

pub use coins::{matrix_from_reals, unitarity_defect, CoinSet, Unitary2};

use crate::error::{Error, Result};
use crate::fmt_real;
use crate::grid::{Side, Slot, Spin, TriangleId, Triangulation};

/// Amplitudes smaller than this in magnitude are dropped after each substep.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Finite-support field, stored densely by triangle id with a sorted support
/// list of triangles holding at least one nonzero slot.
#[derive(Clone, Debug, Default)]
pub struct Field {
    amps: Vec<[Complex64; 3]>,
    support: Vec<TriangleId>,
    in_support: Vec<bool>,
}

impl Field {
    pub fn new() -> Field {
        Field::default()
    }

    fn grow(&mut self, bound: usize) {
        if self.amps.len() < bound {
            self.amps.resize(bound, [ZERO; 3]);
            self.in_support.resize(bound, false);
        }
    }

    pub fn get(&self, slot: Slot) -> Complex64 {
        self.amps.get(slot.tri.index()).map_or(ZERO, |a| a[slot.side.idx()])
    }

    pub fn triangle(&self, t: TriangleId) -> [Complex64; 3] {
        self.amps.get(t.index()).copied().unwrap_or([ZERO; 3])
    }

    pub fn set(&mut self, slot: Slot, value: Complex64) {
        let i = slot.tri.index();
        self.grow(i + 1);
        self.amps[i][slot.side.idx()] = value;
        if value != ZERO && !self.in_support[i] {
            self.in_support[i] = true;
            self.support.push(slot.tri);
        }
    }

    /// Removes and returns the three slot values of `t`.
    pub fn take_triangle(&mut self, t: TriangleId) -> [Complex64; 3] {
        match self.amps.get_mut(t.index()) {
            Some(a) => std::mem::replace(a, [ZERO; 3]),
            None => [ZERO; 3],
        }
    }

    /// Triangles that may hold nonzero values; exact and sorted after [`Field::compact`].
    pub fn support(&self) -> &[TriangleId] {
        &self.support
    }

    /// Prunes negligible amplitudes, drops empty triangles and sorts the support.
    pub fn compact(&mut self) {
        let amps = &mut self.amps;
        let flags = &mut self.in_support;
        self.support.retain(|&t| {
            let a = &mut amps[t.index()];
            for z in a.iter_mut() {
                if z.norm() < PRUNE_THRESHOLD {
                    *z = ZERO;
                }
            }
            let keep = a.iter().any(|z| *z != ZERO);
            if !keep {
                flags[t.index()] = false;
            }
            keep
        });
        self.support.sort_unstable();
    }

    pub fn total_norm(&self) -> f64 {
        self.support.iter().map(|t| self.triangle_norm(*t)).sum()
    }

    /// `Σ_k |ψ̃(t, k)|²`.
    pub fn triangle_norm(&self, t: TriangleId) -> f64 {
        self.triangle(t).iter().map(|z| z.norm_sqr()).sum()
    }

    /// Nonzero slots in `(triangle, side)` order. Call [`Field::compact`] first
    /// for sorted output.
    pub fn nonzero_slots(&self) -> impl Iterator<Item = (Slot, Complex64)> + '_ {
        self.support.iter().flat_map(move |&t| {
            Side::ALL
                .into_iter()
                .map(move |k| (Slot::new(t, k), self.amps[t.index()][k.idx()]))
                .filter(|(_, z)| *z != ZERO)
        })
    }

    /// Rotation substep: the value on side `k − 1` of each triangle moves to side `k`.
    pub fn rotate_substep(&mut self) {
        for &t in &self.support {
            let a = &mut self.amps[t.index()];
            *a = [a[2], a[0], a[1]];
        }
    }

    /// Coin substep: every edge touching the support gets `W` applied to its
    /// `(up, down)` spinor exactly once.
    pub fn coin_substep(&mut self, t: &mut Triangulation, coins: &CoinSet) -> Result<()> {
        self.compact();
        let ids = self.support.clone();
        for &id in &ids {
            t.ensure_materialized(id)?;
        }
        self.grow(t.id_bound());
        let w = coins.w();
        let mut added = Vec::new();
        for &id in &ids {
            let label = t.label(id)?;
            for k in Side::ALL {
                let n = t.neighbor(id, k).expect("support is materialized");
                // Edges between two support triangles are handled from the lower id.
                if self.in_support[n.index()] && n < id {
                    continue;
                }
                let a = self.amps[id.index()][k.idx()];
                let b = self.amps[n.index()][k.idx()];
                if a == ZERO && b == ZERO {
                    continue;
                }
                let own = label.spin(k);
                if t.label(n)?.spin(k) == own {
                    return Err(Error::SpinConflict { tri: id, side: k });
                }
                let (up, down) = if own == Spin::Up { (a, b) } else { (b, a) };
                let out = w * Vector2::new(up, down);
                let (na, nb) = if own == Spin::Up { (out[0], out[1]) } else { (out[1], out[0]) };
                self.amps[id.index()][k.idx()] = na;
                self.amps[n.index()][k.idx()] = nb;
                if !self.in_support[n.index()] && nb != ZERO {
                    added.push(n);
                }
            }
        }
        for n in added {
            if !self.in_support[n.index()] {
                self.in_support[n.index()] = true;
                self.support.push(n);
            }
        }
        self.compact();
        Ok(())
    }
}

/// Initial state: `1/√3` on each side of the origin triangle.
pub fn init_origin_state(t: &Triangulation) -> Field {
    let mut f = Field::new();
    let amp = Complex64::new(1.0 / 3f64.sqrt(), 0.0);
    for k in Side::ALL {
        f.set(Slot::new(t.origin(), k), amp);
    }
    f
}

/// The other slot of the edge under `slot`.
pub fn partner(t: &Triangulation, slot: Slot) -> Option<Slot> {
    t.neighbor(slot.tri, slot.side).map(|n| Slot::new(n, slot.side))
}

fn edge_transformed(
    f: &Field,
    t: &Triangulation,
    slot: Slot,
    matrix: impl Fn(Side) -> Unitary2,
) -> Result<Complex64> {
    let own = f.get(slot);
    let spin = t.slot_spin(slot)?;
    let other = partner(t, slot).map_or(ZERO, |p| f.get(p));
    let (up, down) = if spin == Spin::Up { (own, other) } else { (other, own) };
    let out = matrix(slot.side) * Vector2::new(up, down);
    Ok(if spin == Spin::Up { out[0] } else { out[1] })
}

/// Physical (ungauged) value of one slot: the slot's spin component of
/// `U_k† ψ̃(edge)`.
pub fn physical_component(f: &Field, t: &Triangulation, c: &CoinSet, slot: Slot) -> Result<Complex64> {
    if c.gauge_is_identity() {
        return Ok(f.get(slot));
    }
    edge_transformed(f, t, slot, |k| c.gauge(k).adjoint())
}

fn map_edges(f: &Field, t: &Triangulation, matrix: impl Fn(Side) -> Unitary2) -> Result<Field> {
    let mut candidates: Vec<Slot> = Vec::new();
    for &tri in f.support() {
        for k in Side::ALL {
            let s = Slot::new(tri, k);
            candidates.push(s);
            if let Some(p) = partner(t, s) {
                candidates.push(p);
            }
        }
    }
    candidates.sort_unstable();
    candidates.dedup();
    let mut out = Field::new();
    for s in candidates {
        let v = edge_transformed(f, t, s, &matrix)?;
        if v != ZERO {
            out.set(s, v);
        }
    }
    out.compact();
    Ok(out)
}

/// Converts `ψ̃` to `ψ` edge by edge: `ψ(edge) = U_k† ψ̃(edge)`.
pub fn gauge_to_physical(f: &Field, t: &Triangulation, c: &CoinSet) -> Result<Field> {
    if c.gauge_is_identity() {
        let mut out = f.clone();
        out.compact();
        return Ok(out);
    }
    map_edges(f, t, |k| c.gauge(k).adjoint())
}

/// Inverse of [`gauge_to_physical`]: `ψ̃(edge) = U_k ψ(edge)`.
pub fn physical_to_gauged(f: &Field, t: &Triangulation, c: &CoinSet) -> Result<Field> {
    if c.gauge_is_identity() {
        let mut out = f.clone();
        out.compact();
        return Ok(out);
    }
    map_edges(f, t, |k| *c.gauge(k))
}

/// Probability of being on triangle `tri`: `Σ_k |ψ^{s_k}(tri, k)|²` in the physical gauge.
pub fn component_prob(f: &Field, t: &Triangulation, c: &CoinSet, tri: TriangleId) -> Result<f64> {
    if c.gauge_is_identity() {
        return Ok(f.triangle_norm(tri));
    }
    let mut p = 0.0;
    for k in Side::ALL {
        p += physical_component(f, t, c, Slot::new(tri, k))?.norm_sqr();
    }
    Ok(p)
}

pub fn total_norm(f: &Field) -> f64 {
    f.total_norm()
}

/// Writes the physical field as `triangle,side,re,im`, sorted by `(triangle, side)`.
pub fn write_field_csv<W: Write>(f: &Field, t: &Triangulation, c: &CoinSet, mut out: W) -> Result<()> {
    let phys = gauge_to_physical(f, t, c)?;
    writeln!(out, "triangle,side,re,im")?;
    for (slot, z) in phys.nonzero_slots() {
        writeln!(out, "{},{},{},{}", slot.tri, slot.side, fmt_real(z.re), fmt_real(z.im))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests;
