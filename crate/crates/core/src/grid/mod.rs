//! Labeled triangulated surface seen through its dual graph.
//!
//! Triangles are nodes, glued to each other side-to-side; a gluing always joins
//! side `k` of one triangle to side `k` of the other. The flat triangular grid is
//! materialized lazily around the region in use, so the surface behaves as an
//! infinite grid while only a finite part of it is ever stored.
//!
//! Curvature is tracked through vertex incidence. Lattice vertices start with
//! incidence 6 whether or not all six surrounding cells have been materialized,
//! so lazy growth never changes the geometry.

mod lattice;
mod snapshot;
mod types;

use std::collections::BTreeSet;

use rustc_hash::FxHashMap as HashMap;
use std::f64::consts::PI;

pub use lattice::{cell_centroid, cell_corners, point_position, reflected_neighbor, Cell, Orientation, SQRT3};
pub use snapshot::{GraphSnapshot, TriangleRecord, VertexRecord};
pub use types::{Side, Slot, Spin, TriLabel, TriangleId, VertexId};

use crate::error::{Error, Result};
use lattice::LatticePoint;

const FLAT_INCIDENCE: u32 = 6;

/// Distance (in edge lengths) beyond the dirty radius past which the surface is
/// guaranteed flat and every slot empty.
pub const DIRTY_MARGIN: f64 = 3.0;

#[derive(Clone, Debug)]
struct Tri {
    label: TriLabel,
    adj: [Option<TriangleId>; 3],
    corners: [VertexId; 3],
    cell: Option<Cell>,
    alive: bool,
}

#[derive(Clone, Debug)]
struct Vertex {
    pos: [f64; 2],
    incidence: u32,
    alive: bool,
}

/// A triangulated surface with an origin triangle, built from the flat grid by
/// 1-to-3 splits and 3-to-1 merges.
#[derive(Clone, Debug)]
pub struct Triangulation {
    tris: Vec<Tri>,
    verts: Vec<Vertex>,
    flat_cells: HashMap<Cell, TriangleId>,
    lattice_verts: HashMap<LatticePoint, VertexId>,
    origin: TriangleId,
    well_vertices: BTreeSet<VertexId>,
    /// Live vertices whose incidence differs from 6.
    curved: BTreeSet<VertexId>,
    /// Live triangles that were produced by a move rather than by materialization.
    rewritten: BTreeSet<TriangleId>,
    live: usize,
    dirty_radius: f64,
    /// Radius around (0, 0) containing every corner of every triangle a move
    /// has touched; beyond it the surface is the plain lattice.
    moved_radius: f64,
}

impl Triangulation {
    /// The flat alternating grid, materialized out to `initial_radius` around the
    /// origin triangle's centroid.
    pub fn new_flat(initial_radius: f64) -> Triangulation {
        let mut t = Triangulation {
            tris: Vec::new(),
            verts: Vec::new(),
            flat_cells: HashMap::default(),
            lattice_verts: HashMap::default(),
            origin: TriangleId(0),
            well_vertices: BTreeSet::new(),
            curved: BTreeSet::new(),
            rewritten: BTreeSet::new(),
            live: 0,
            dirty_radius: 0.0,
            moved_radius: 0.0,
        };
        let origin = t.create_flat_cell(Cell::ORIGIN).expect("empty grid accepts the origin cell");
        t.origin = origin;

        let mut queue = std::collections::VecDeque::from([origin]);
        let mut seen = BTreeSet::from([origin]);
        while let Some(id) = queue.pop_front() {
            t.ensure_materialized(id).expect("flat cells materialize");
            for k in Side::ALL {
                let n = t.tris[id.index()].adj[k.idx()].expect("materialized");
                if !seen.contains(&n) && norm(t.centroid(n)) <= initial_radius {
                    seen.insert(n);
                    queue.push_back(n);
                }
            }
        }
        t
    }

    pub fn origin(&self) -> TriangleId {
        self.origin
    }

    /// One past the largest triangle id handed out so far.
    pub fn id_bound(&self) -> usize {
        self.tris.len()
    }

    pub fn vertex_id_bound(&self) -> usize {
        self.verts.len()
    }

    pub fn live_triangle_count(&self) -> usize {
        self.live
    }

    pub fn is_live(&self, t: TriangleId) -> bool {
        self.tris.get(t.index()).is_some_and(|r| r.alive)
    }

    pub fn is_live_vertex(&self, v: VertexId) -> bool {
        self.verts.get(v.index()).is_some_and(|r| r.alive)
    }

    fn tri(&self, t: TriangleId) -> Result<&Tri> {
        self.tris.get(t.index()).filter(|r| r.alive).ok_or(Error::TriangleNotLive(t))
    }

    fn vertex(&self, v: VertexId) -> Result<&Vertex> {
        self.verts.get(v.index()).filter(|r| r.alive).ok_or(Error::VertexNotLive(v))
    }

    pub fn label(&self, t: TriangleId) -> Result<TriLabel> {
        Ok(self.tri(t)?.label)
    }

    /// Spin carried by the slot, as dictated by the owning triangle's label.
    pub fn slot_spin(&self, slot: Slot) -> Result<Spin> {
        Ok(self.tri(slot.tri)?.label.spin(slot.side))
    }

    /// Neighbor across `side`, if it has been materialized.
    pub fn neighbor(&self, t: TriangleId, side: Side) -> Option<TriangleId> {
        self.tris.get(t.index()).filter(|r| r.alive).and_then(|r| r.adj[side.idx()])
    }

    /// Neighbor across `side`, materializing flat grid as needed.
    pub fn neighbor_mat(&mut self, t: TriangleId, side: Side) -> Result<TriangleId> {
        self.ensure_materialized(t)?;
        Ok(self.tris[t.index()].adj[side.idx()].expect("materialized triangle has all neighbors"))
    }

    pub fn corners(&self, t: TriangleId) -> Result<[VertexId; 3]> {
        Ok(self.tri(t)?.corners)
    }

    /// Lattice cell of a triangle that is still the original flat cell.
    pub fn cell(&self, t: TriangleId) -> Option<Cell> {
        self.tris.get(t.index()).filter(|r| r.alive).and_then(|r| r.cell)
    }

    pub fn vertex_position(&self, v: VertexId) -> Result<[f64; 2]> {
        Ok(self.vertex(v)?.pos)
    }

    pub fn incidence(&self, v: VertexId) -> Result<u32> {
        Ok(self.vertex(v)?.incidence)
    }

    pub fn well_vertices(&self) -> &BTreeSet<VertexId> {
        &self.well_vertices
    }

    /// Live vertices whose deficit angle is nonzero.
    pub fn curved_vertices(&self) -> &BTreeSet<VertexId> {
        &self.curved
    }

    pub fn live_triangles(&self) -> impl Iterator<Item = TriangleId> + '_ {
        self.tris.iter().enumerate().filter(|(_, r)| r.alive).map(|(i, _)| TriangleId(i as u32))
    }

    pub fn live_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.verts.iter().enumerate().filter(|(_, r)| r.alive).map(|(i, _)| VertexId(i as u32))
    }

    pub fn centroid(&self, t: TriangleId) -> [f64; 2] {
        let c = self.tris[t.index()].corners.map(|v| self.verts[v.index()].pos);
        [(c[0][0] + c[1][0] + c[2][0]) / 3.0, (c[0][1] + c[1][1] + c[2][1]) / 3.0]
    }

    /// Midpoint of the edge under `slot`; both slots of an edge share it.
    pub fn slot_position(&self, slot: Slot) -> [f64; 2] {
        let r = &self.tris[slot.tri.index()];
        let a = self.verts[r.corners[slot.side.next().idx()].index()].pos;
        let b = self.verts[r.corners[slot.side.prev().idx()].index()].pos;
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
    }

    /// Deficit angle `2π − n·π/3` of a vertex with `n` incident triangles.
    pub fn vertex_deficit(&self, v: VertexId) -> Result<f64> {
        Ok(self.deficit_units(v)? as f64 * PI / 3.0)
    }

    /// Deficit angle in units of π/3, i.e. `6 − n`.
    pub fn deficit_units(&self, v: VertexId) -> Result<i64> {
        Ok(FLAT_INCIDENCE as i64 - self.vertex(v)?.incidence as i64)
    }

    /// Sum of all deficit angles in units of π/3. Zero on any surface reachable
    /// from the flat grid.
    pub fn global_deficit_units(&self) -> i64 {
        self.curved
            .iter()
            .map(|v| FLAT_INCIDENCE as i64 - self.verts[v.index()].incidence as i64)
            .sum()
    }

    /// Radius around (0, 0) containing every triangle touched by a move or by
    /// nonzero amplitude.
    pub fn dirty_radius(&self) -> f64 {
        self.dirty_radius
    }

    pub fn mark_dirty(&mut self, t: TriangleId) {
        let r = norm(self.centroid(t));
        if r > self.dirty_radius {
            self.dirty_radius = r;
        }
    }

    fn mark_moved(&mut self, t: TriangleId) {
        for v in self.tris[t.index()].corners {
            let r = norm(self.verts[v.index()].pos);
            if r > self.moved_radius {
                self.moved_radius = r;
            }
        }
        self.mark_dirty(t);
    }

    /// True when `t` is a lattice cell far enough from every move that it and
    /// its surroundings are plain lattice.
    pub fn is_beyond_moves(&self, t: TriangleId) -> bool {
        self.tris[t.index()].cell.is_some() && norm(self.centroid(t)) > self.moved_radius + DIRTY_MARGIN
    }

    /// The live triangle occupying a lattice cell, if materialized.
    pub fn flat_cell(&self, cell: Cell) -> Option<TriangleId> {
        self.flat_cells.get(&cell).copied().filter(|&t| self.tris[t.index()].alive)
    }

    /// Materializes a single lattice cell away from any move.
    pub fn materialize_cell(&mut self, cell: Cell) -> Result<TriangleId> {
        match self.flat_cells.get(&cell) {
            Some(&t) if self.tris[t.index()].alive => Ok(t),
            Some(&t) => Err(Error::TriangleNotLive(t)),
            None => self.create_flat_cell(cell),
        }
    }

    /// True when `t` lies far enough outside the dirty radius that it and its
    /// surroundings are untouched flat grid.
    pub fn is_outside_dirty(&self, t: TriangleId) -> bool {
        norm(self.centroid(t)) > self.dirty_radius + DIRTY_MARGIN
    }

    fn lattice_vertex(&mut self, p: LatticePoint) -> VertexId {
        if let Some(&v) = self.lattice_verts.get(&p) {
            return v;
        }
        let v = self.push_vertex(point_position(p), FLAT_INCIDENCE);
        self.lattice_verts.insert(p, v);
        v
    }

    fn push_vertex(&mut self, pos: [f64; 2], incidence: u32) -> VertexId {
        let v = VertexId(self.verts.len() as u32);
        self.verts.push(Vertex { pos, incidence, alive: true });
        if incidence != FLAT_INCIDENCE {
            self.curved.insert(v);
        }
        v
    }

    fn push_tri(&mut self, tri: Tri) -> TriangleId {
        let id = TriangleId(self.tris.len() as u32);
        self.tris.push(tri);
        self.live += 1;
        id
    }

    fn kill_tri(&mut self, t: TriangleId) {
        self.tris[t.index()].alive = false;
        self.live -= 1;
        self.rewritten.remove(&t);
    }

    fn bump_incidence(&mut self, v: VertexId, delta: i32) {
        let rec = &mut self.verts[v.index()];
        rec.incidence = (rec.incidence as i32 + delta) as u32;
        if rec.incidence == FLAT_INCIDENCE {
            self.curved.remove(&v);
        } else {
            self.curved.insert(v);
        }
    }

    /// Creates a not-yet-existing flat cell and glues it to every existing
    /// flat neighbor.
    fn create_flat_cell(&mut self, cell: Cell) -> Result<TriangleId> {
        debug_assert!(!self.flat_cells.contains_key(&cell));
        let corners = cell_corners(cell).map(|p| self.lattice_vertex(p));
        let label = match cell.orientation {
            Orientation::Up => TriLabel::UP,
            Orientation::Down => TriLabel::DOWN,
        };
        let id = self.push_tri(Tri { label, adj: [None; 3], corners, cell: Some(cell), alive: true });
        self.flat_cells.insert(cell, id);

        for k in 0..3 {
            let ncell = reflected_neighbor(cell, k);
            let Some(&n) = self.flat_cells.get(&ncell) else { continue };
            let nrec = &self.tris[n.index()];
            if !nrec.alive || nrec.adj[k].is_some() {
                return Err(Error::Invariant(format!(
                    "materializing {cell:?}: neighbor cell {ncell:?} was rewritten before its surroundings existed"
                )));
            }
            self.tris[id.index()].adj[k] = Some(n);
            self.tris[n.index()].adj[k] = Some(id);
        }
        Ok(id)
    }

    /// Makes sure all three neighbors of `t` exist. Idempotent.
    pub fn ensure_materialized(&mut self, t: TriangleId) -> Result<()> {
        let rec = self.tri(t)?;
        if rec.adj.iter().all(Option::is_some) {
            return Ok(());
        }
        let Some(cell) = rec.cell else {
            return Err(Error::Invariant(format!("rewritten triangle {t} has an unglued side")));
        };
        for k in 0..3 {
            if self.tris[t.index()].adj[k].is_none() {
                self.create_flat_cell(reflected_neighbor(cell, k))?;
            }
            debug_assert!(self.tris[t.index()].adj[k].is_some());
        }
        Ok(())
    }

    /// 1-to-3 move: replaces `t` by a well of three triangles `(N1, N2, N3)`
    /// around a new vertex at the centroid of `t`.
    ///
    /// `N_j` takes over side `j` of `t`. Internally `N2`/`N3` are glued on side 1,
    /// `N3`/`N1` on side 2 and `N1`/`N2` on side 3. With `t` labeled
    /// `(s1, s2, s3)`, the labels are `N1 = (s1, s2, s3)`, `N2 = (s1, s2, ¬s3)`,
    /// `N3 = (¬s1, ¬s2, s3)`.
    pub fn split_1to3(&mut self, t: TriangleId) -> Result<[TriangleId; 3]> {
        self.ensure_materialized(t)?;
        self.mark_moved(t);
        let parent = self.tris[t.index()].clone();
        let c = parent.corners;
        let center = self.push_vertex(self.centroid(t), 3);
        self.well_vertices.insert(center);

        let [s1, s2, s3] = parent.label.spins();
        let labels = [
            parent.label,
            TriLabel::new(s1, s2, s3.flip()).expect("s1 == s2 is kept"),
            TriLabel::new(s1.flip(), s2.flip(), s3).expect("s1 == s2 is kept"),
        ];
        let base = self.tris.len() as u32;
        let ids = [TriangleId(base), TriangleId(base + 1), TriangleId(base + 2)];

        for j in 0..3 {
            let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
            let mut corners = [center; 3];
            corners[j1] = c[j2];
            corners[j2] = c[j1];
            let mut adj = [None; 3];
            adj[j] = parent.adj[j];
            adj[j1] = Some(ids[j2]);
            adj[j2] = Some(ids[j1]);
            let id = self.push_tri(Tri { label: labels[j], adj, corners, cell: None, alive: true });
            debug_assert_eq!(id, ids[j]);
            let outer = parent.adj[j].expect("materialized");
            self.tris[outer.index()].adj[j] = Some(id);
            self.rewritten.insert(id);
        }
        self.kill_tri(t);
        for v in c {
            self.bump_incidence(v, 1);
        }
        if self.origin == t {
            self.origin = ids[0];
        }
        Ok(ids)
    }

    /// Orders a 3-cycle as `(u, v, w)` with `u`/`v` glued on side 1, `v`/`w` on
    /// side 2 and `w`/`u` on side 3, so the external sides are 2, 3 and 1.
    pub fn canonical_cycle(&self, members: [TriangleId; 3]) -> Result<[TriangleId; 3]> {
        let fail = |why: &str| Error::NotACycle(members, why.to_string());
        if members[0] == members[1] || members[1] == members[2] || members[0] == members[2] {
            return Err(fail("repeated member"));
        }
        let mut by_external: [Option<TriangleId>; 3] = [None; 3];
        for &x in &members {
            let rec = self.tri(x).map_err(|_| fail("member not live"))?;
            let internal: Vec<usize> =
                (0..3).filter(|&k| rec.adj[k].is_some_and(|n| members.contains(&n))).collect();
            if internal.len() != 2 {
                return Err(fail("member is not glued to both others"));
            }
            if rec.adj[internal[0]] == rec.adj[internal[1]] {
                return Err(fail("member glued twice to the same triangle"));
            }
            let external = 3 - internal[0] - internal[1];
            if by_external[external].replace(x).is_some() {
                return Err(fail("two members share an external side index"));
            }
        }
        let [Some(ext1), Some(ext2), Some(ext3)] = by_external else {
            return Err(fail("external side indices do not cover 1, 2, 3"));
        };
        Ok([ext2, ext3, ext1])
    }

    /// The member of a canonical cycle whose external side is `side`.
    pub fn member_with_external(cycle: [TriangleId; 3], side: Side) -> TriangleId {
        match side.get() {
            2 => cycle[0],
            3 => cycle[1],
            _ => cycle[2],
        }
    }

    /// External side index of position `i` of a canonical cycle.
    pub fn external_side_of(i: usize) -> Side {
        [Side::TWO, Side::THREE, Side::ONE][i]
    }

    /// 3-to-1 move: replaces a 3-cycle by a single triangle. Member `x` with
    /// external side `j` hands its side-`j` gluing and carried spin to the merged
    /// triangle.
    pub fn merge_3to1(&mut self, cycle: [TriangleId; 3]) -> Result<TriangleId> {
        let cycle = self.canonical_cycle(cycle)?;
        for x in cycle {
            self.ensure_materialized(x)?;
        }
        let recs = cycle.map(|x| self.tris[x.index()].clone());
        let center = recs[0]
            .corners
            .iter()
            .copied()
            .find(|v| recs[1].corners.contains(v) && recs[2].corners.contains(v))
            .ok_or_else(|| Error::NotACycle(cycle, "no common corner".into()))?;
        if self.verts[center.index()].incidence != 3 {
            return Err(Error::NotACycle(cycle, "center vertex incidence is not 3".into()));
        }

        let mut adj = [None; 3];
        let mut spins = [Spin::Up; 3];
        let mut outer_edges = [[center; 2]; 3];
        for (i, rec) in recs.iter().enumerate() {
            let j = Self::external_side_of(i);
            adj[j.idx()] = rec.adj[j.idx()];
            spins[j.idx()] = rec.label.spin(j);
            outer_edges[j.idx()] = [rec.corners[j.next().idx()], rec.corners[j.prev().idx()]];
        }
        let label = TriLabel::from_spins(spins).ok_or_else(|| {
            Error::InvalidLabel(spins.iter().map(|s| if *s == Spin::Up { 'u' } else { 'd' }).collect())
        })?;
        let mut outer: Vec<VertexId> = outer_edges.iter().flatten().copied().collect();
        outer.sort_unstable();
        outer.dedup();
        if outer.len() != 3 || outer.contains(&center) {
            return Err(Error::NotACycle(cycle, "outer boundary is not a triangle".into()));
        }
        let mut corners = [center; 3];
        for k in 0..3 {
            corners[k] = *outer
                .iter()
                .find(|v| !outer_edges[k].contains(v))
                .expect("three outer vertices, two on each edge");
        }

        let m = self.push_tri(Tri { label, adj, corners, cell: None, alive: true });
        for (k, n) in adj.iter().enumerate() {
            let n = n.expect("materialized");
            self.tris[n.index()].adj[k] = Some(m);
        }
        for x in cycle {
            self.kill_tri(x);
        }
        self.rewritten.insert(m);
        self.verts[center.index()].alive = false;
        self.curved.remove(&center);
        self.well_vertices.remove(&center);
        for v in outer {
            self.bump_incidence(v, -1);
        }
        if cycle.contains(&self.origin) {
            self.origin = m;
        }
        self.mark_moved(m);
        Ok(m)
    }

    /// The canonical 3-cycle containing `t`, if any.
    pub fn cycle_containing(&self, t: TriangleId) -> Option<[TriangleId; 3]> {
        let rec = self.tris.get(t.index()).filter(|r| r.alive)?;
        for a in 0..3 {
            for b in (a + 1)..3 {
                let (Some(y), Some(z)) = (rec.adj[a], rec.adj[b]) else { continue };
                if y == z {
                    continue;
                }
                let glued = self.tris[y.index()].adj.contains(&Some(z));
                if glued {
                    if let Ok(c) = self.canonical_cycle([t, y, z]) {
                        return Some(c);
                    }
                }
            }
        }
        None
    }

    /// Every 3-cycle of the dual graph, each in canonical order, sorted.
    ///
    /// Only triangles produced by moves are searched; the flat grid has none.
    pub fn find_3cycles(&self) -> Vec<[TriangleId; 3]> {
        let mut found = BTreeSet::new();
        for &t in &self.rewritten {
            if let Some(c) = self.cycle_containing(t) {
                found.insert(c);
            }
        }
        found.into_iter().collect()
    }

    /// Checks the local invariants of one triangle: involutive side-preserving
    /// gluing, shared edge geometry, spin complementarity and distinct labels.
    pub fn check_triangle(&self, t: TriangleId) -> Result<()> {
        let rec = self.tri(t)?;
        for k in Side::ALL {
            let Some(n) = rec.adj[k.idx()] else {
                if rec.cell.is_none() {
                    return Err(Error::Invariant(format!("rewritten triangle {t} unglued on side {k}")));
                }
                continue;
            };
            let nrec = self.tri(n).map_err(|_| Error::Invariant(format!("{t} glued to dead {n}")))?;
            if nrec.adj[k.idx()] != Some(t) {
                return Err(Error::Invariant(format!("gluing ({t},{k}) -> {n} is not involutive")));
            }
            if rec.label.spin(k) == nrec.label.spin(k) {
                return Err(Error::Invariant(format!("edge ({t},{k})/({n},{k}) carries one spin twice")));
            }
            if rec.label == nrec.label {
                return Err(Error::Invariant(format!("adjacent triangles {t} and {n} share a label")));
            }
            let mut e1 = [rec.corners[k.next().idx()], rec.corners[k.prev().idx()]];
            let mut e2 = [nrec.corners[k.next().idx()], nrec.corners[k.prev().idx()]];
            e1.sort_unstable();
            e2.sort_unstable();
            if e1 != e2 {
                return Err(Error::Invariant(format!("edge ({t},{k}) has mismatched endpoints")));
            }
        }
        for v in rec.corners {
            if self.vertex(v).map(|r| r.incidence).unwrap_or(0) == 0 {
                return Err(Error::Invariant(format!("corner {v} of {t} is dead or isolated")));
            }
        }
        Ok(())
    }

    /// Full structural check; linear in the number of stored triangles.
    pub fn check_invariants(&self) -> Result<()> {
        for t in self.live_triangles() {
            self.check_triangle(t)?;
        }
        for cycle in self.find_3cycles() {
            // canonical_cycle already enforces one external side per index.
            self.canonical_cycle(cycle)?;
        }
        if !self.is_live(self.origin) {
            return Err(Error::Invariant("origin triangle is dead".into()));
        }
        let units = self.global_deficit_units();
        if units != 0 {
            return Err(Error::Invariant(format!("global deficit is {units}·π/3, expected 0")));
        }
        Ok(())
    }

    /// Recomputes the deficit sum from every live vertex, bypassing the
    /// curved-vertex index.
    pub fn recount_deficit_units(&self) -> i64 {
        self.verts
            .iter()
            .filter(|v| v.alive)
            .map(|v| FLAT_INCIDENCE as i64 - v.incidence as i64)
            .sum()
    }

    /// Id-free description of the surface: every triangle and vertex keyed by
    /// its exact corner coordinates. Two triangulations with equal signatures
    /// are isomorphic with labels, gluings, geometry and origin preserved.
    ///
    /// Stretches of untouched grid (lattice cells with their default label,
    /// glued only to such cells) are left out, so how far the grid happens to
    /// be materialized does not matter.
    pub fn signature(&self) -> Signature {
        let key = |v: VertexId| {
            let p = self.verts[v.index()].pos;
            (p[0].to_bits(), p[1].to_bits())
        };
        let tri_key = |t: TriangleId| {
            let mut k = self.tris[t.index()].corners.map(key);
            k.sort_unstable();
            k
        };
        let lattice_of: HashMap<VertexId, LatticePoint> = self.lattice_verts.iter().map(|(p, v)| (*v, *p)).collect();
        let standard_cell = |t: TriangleId| -> Option<Cell> {
            let rec = &self.tris[t.index()];
            let pts = [0, 1, 2].map(|k| lattice_of.get(&rec.corners[k]).copied());
            let pts = [pts[0]?, pts[1]?, pts[2]?];
            let cell = lattice::cell_from_points(pts)?;
            let label = match cell.orientation {
                Orientation::Up => TriLabel::UP,
                Orientation::Down => TriLabel::DOWN,
            };
            (cell_corners(cell) == pts && rec.label == label).then_some(cell)
        };
        let untouched = |t: TriangleId| {
            let Some(cell) = standard_cell(t) else { return false };
            (0..3).all(|k| match self.tris[t.index()].adj[k] {
                None => true,
                Some(n) => standard_cell(n) == Some(reflected_neighbor(cell, k)),
            })
        };
        let triangles = self
            .live_triangles()
            .filter(|&t| t == self.origin || !untouched(t))
            .map(|t| {
                let rec = &self.tris[t.index()];
                let adj = rec.adj.map(|n| n.map(tri_key));
                (tri_key(t), (rec.label, rec.corners.map(key), adj))
            })
            .collect();
        let vertices = self
            .live_vertices()
            .filter(|v| {
                let rec = &self.verts[v.index()];
                rec.incidence != FLAT_INCIDENCE || !lattice_of.contains_key(v) || self.well_vertices.contains(v)
            })
            .map(|v| (key(v), (self.verts[v.index()].incidence, self.well_vertices.contains(&v))))
            .collect();
        Signature { triangles, vertices, origin: tri_key(self.origin) }
    }

    /// Overwrites a label without any check; only for exercising error paths.
    #[doc(hidden)]
    pub fn force_label(&mut self, t: TriangleId, label: TriLabel) {
        self.tris[t.index()].label = label;
    }

    pub fn snapshot(&self) -> GraphSnapshot {
        GraphSnapshot::capture(self)
    }
}

type PointKey = (u64, u64);

type TriangleKey = [PointKey; 3];

/// See [`Triangulation::signature`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    triangles: std::collections::BTreeMap<TriangleKey, (TriLabel, TriangleKey, [Option<TriangleKey>; 3])>,
    vertices: std::collections::BTreeMap<PointKey, (u32, bool)>,
    origin: [PointKey; 3],
}

pub(crate) fn norm(p: [f64; 2]) -> f64 {
    (p[0] * p[0] + p[1] * p[1]).sqrt()
}
