//! The coupled timestep: rotation, coin, 3-to-1 merges, then 1-to-3 splits.

mod lines;
mod translate;

use std::cmp::Ordering;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use lines::LineIndex;
pub use translate::{internal_slots, translate_out};
use translate::translate_out_indexed;

use crate::error::{Error, Result};
use crate::fmt_real;
use crate::grid::{Side, Slot, TriangleId, Triangulation};
use crate::walker::{component_prob, init_origin_state, physical_component, CoinSet, Field};

/// Allowed drift of the total norm over a run.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Radius of the grid materialized up front; the rest grows on demand.
pub const INITIAL_RADIUS: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds {
    alpha: f64,
    beta: f64,
}

impl Thresholds {
    pub fn new(alpha: f64, beta: f64) -> Result<Thresholds> {
        for (name, v) in [("alpha", alpha), ("beta", beta)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} = {v} is outside [0, 1]")));
            }
        }
        Ok(Thresholds { alpha, beta })
    }

    /// `beta = 3 alpha`, capped at 1.
    pub fn paired(alpha: f64) -> Result<Thresholds> {
        Thresholds::new(alpha, (3.0 * alpha).min(1.0))
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MoveKind {
    Split,
    Merge,
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MoveKind::Split => "split",
            MoveKind::Merge => "merge",
        })
    }
}

/// One applied move. For a split, `triangles` is the parent followed by the
/// three children; for a merge, the canonical cycle followed by the merged
/// triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct MoveRecord {
    pub step: u64,
    pub kind: MoveKind,
    pub triangles: Vec<TriangleId>,
    pub probability: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MoveLog {
    records: Vec<MoveRecord>,
}

impl MoveLog {
    pub fn records(&self) -> &[MoveRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn count(&self, kind: MoveKind) -> usize {
        self.records.iter().filter(|r| r.kind == kind).count()
    }

    pub fn in_step(&self, step: u64) -> impl Iterator<Item = &MoveRecord> {
        self.records.iter().filter(move |r| r.step == step)
    }

    fn push(&mut self, r: MoveRecord) {
        self.records.push(r);
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "step,kind,triangle_ids,probability_at_trigger")?;
        for r in &self.records {
            let ids: Vec<String> = r.triangles.iter().map(|t| t.to_string()).collect();
            writeln!(out, "{},{},{},{}", r.step, r.kind, ids.join(";"), fmt_real(r.probability))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssertLevel {
    None,
    /// Norm drift check after every step.
    #[default]
    Norm,
    /// Norm check, local checks after every move and a full invariant sweep
    /// after every step.
    Full,
}

/// Moves performed by one call to [`SimState::step`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepSummary {
    pub merges: usize,
    pub splits: usize,
}

#[derive(Clone, Debug)]
pub struct SimState {
    pub triangulation: Triangulation,
    pub field: Field,
    pub coins: CoinSet,
    pub thresholds: Thresholds,
    pub step_index: u64,
    pub move_log: MoveLog,
    pub assert_level: AssertLevel,
    reference_norm: f64,
}

fn by_probability_desc(a: f64, b: f64) -> Ordering {
    b.total_cmp(&a)
}

impl SimState {
    /// Flat grid with the standard origin state.
    pub fn new(coins: CoinSet, thresholds: Thresholds) -> SimState {
        let t = Triangulation::new_flat(INITIAL_RADIUS);
        let f = init_origin_state(&t);
        SimState::with_field(t, f, coins, thresholds)
    }

    pub fn with_field(mut triangulation: Triangulation, mut field: Field, coins: CoinSet, thresholds: Thresholds) -> SimState {
        field.compact();
        for &tri in field.support() {
            triangulation.mark_dirty(tri);
        }
        let reference_norm = field.total_norm();
        SimState {
            triangulation,
            field,
            coins,
            thresholds,
            step_index: 0,
            move_log: MoveLog::default(),
            assert_level: AssertLevel::default(),
            reference_norm,
        }
    }

    pub fn with_assert_level(mut self, level: AssertLevel) -> SimState {
        self.assert_level = level;
        self
    }

    /// Physical probability of sitting on `tri`.
    pub fn probability(&self, tri: TriangleId) -> Result<f64> {
        component_prob(&self.field, &self.triangulation, &self.coins, tri)
    }

    /// Physical probability on the six internal slots of a canonical cycle.
    pub fn internal_probability(&self, cycle: [TriangleId; 3]) -> Result<f64> {
        let mut p = 0.0;
        for (slot, _) in internal_slots(cycle) {
            p += physical_component(&self.field, &self.triangulation, &self.coins, slot)?.norm_sqr();
        }
        Ok(p)
    }

    /// Triangles above `alpha`, by descending probability then id.
    pub fn detect_1to3(&self) -> Result<Vec<(TriangleId, f64)>> {
        // Rounding can push a probability just past 1.
        if self.thresholds.alpha >= 1.0 {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        for &tri in self.field.support() {
            let p = self.probability(tri)?;
            if p > self.thresholds.alpha {
                out.push((tri, p));
            }
        }
        out.sort_by(|a, b| by_probability_desc(a.1, b.1).then(a.0.cmp(&b.0)));
        Ok(out)
    }

    /// 3-cycles whose internal probability is below `beta`, by descending
    /// probability then smallest member id.
    pub fn detect_3to1(&self) -> Result<Vec<([TriangleId; 3], f64)>> {
        if self.thresholds.beta <= 0.0 {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        for cycle in self.triangulation.find_3cycles() {
            let p = self.internal_probability(cycle)?;
            if p < self.thresholds.beta {
                out.push((cycle, p));
            }
        }
        let min_id = |c: &[TriangleId; 3]| *c.iter().min().expect("three members");
        out.sort_by(|a, b| by_probability_desc(a.1, b.1).then(min_id(&a.0).cmp(&min_id(&b.0))));
        Ok(out)
    }

    /// Moves the internal amplitudes of `cycle` out along their rays.
    pub fn translate_out(&mut self, cycle: [TriangleId; 3]) -> Result<()> {
        let cycle = self.triangulation.canonical_cycle(cycle)?;
        translate_out(&mut self.triangulation, &mut self.field, cycle)
    }

    /// Detects and performs all merges of the current step.
    pub fn apply_merges(&mut self) -> Result<usize> {
        let mut done = 0;
        let mut index = LineIndex::default();
        for (cycle, _) in self.detect_3to1()? {
            if !cycle.iter().all(|&x| self.triangulation.is_live(x)) {
                continue;
            }
            let Ok(cycle) = self.triangulation.canonical_cycle(cycle) else { continue };
            let p = self.internal_probability(cycle)?;
            if p >= self.thresholds.beta {
                continue;
            }
            self.merge_at(cycle, p, &mut index)?;
            done += 1;
        }
        Ok(done)
    }

    /// Translates and merges one well regardless of thresholds; returns the merged triangle.
    pub fn merge(&mut self, cycle: [TriangleId; 3]) -> Result<TriangleId> {
        let cycle = self.triangulation.canonical_cycle(cycle)?;
        let p = self.internal_probability(cycle)?;
        self.merge_at(cycle, p, &mut LineIndex::default())
    }

    fn merge_at(&mut self, cycle: [TriangleId; 3], p: f64, index: &mut LineIndex) -> Result<TriangleId> {
        translate_out_indexed(&mut self.triangulation, &mut self.field, cycle, index)?;
        let mut outer = [Default::default(); 3];
        for (i, &x) in cycle.iter().enumerate() {
            let j = Triangulation::external_side_of(i);
            outer[j.idx()] = self.field.get(Slot::new(x, j));
            self.field.take_triangle(x);
        }
        let m = self.triangulation.merge_3to1(cycle)?;
        for k in Side::ALL {
            self.field.set(Slot::new(m, k), outer[k.idx()]);
        }
        self.move_log.push(MoveRecord {
            step: self.step_index + 1,
            kind: MoveKind::Merge,
            triangles: vec![cycle[0], cycle[1], cycle[2], m],
            probability: p,
        });
        if self.assert_level == AssertLevel::Full {
            self.check_around(m)?;
        }
        Ok(m)
    }

    /// Detects and performs all splits of the current step.
    pub fn apply_splits(&mut self) -> Result<usize> {
        self.field.compact();
        let targets = self.detect_1to3()?;
        for &(tri, p) in &targets {
            self.split_at(tri, p)?;
        }
        Ok(targets.len())
    }

    /// Splits one triangle regardless of thresholds; returns the children `[N1, N2, N3]`.
    pub fn split(&mut self, tri: TriangleId) -> Result<[TriangleId; 3]> {
        let p = self.probability(tri)?;
        self.split_at(tri, p)
    }

    fn split_at(&mut self, tri: TriangleId, p: f64) -> Result<[TriangleId; 3]> {
        let values = self.field.take_triangle(tri);
        let children = self.triangulation.split_1to3(tri)?;
        for k in Side::ALL {
            self.field.set(Slot::new(children[k.idx()], k), values[k.idx()]);
        }
        self.move_log.push(MoveRecord {
            step: self.step_index + 1,
            kind: MoveKind::Split,
            triangles: vec![tri, children[0], children[1], children[2]],
            probability: p,
        });
        if self.assert_level == AssertLevel::Full {
            for c in children {
                self.check_around(c)?;
            }
        }
        Ok(children)
    }

    fn check_around(&self, tri: TriangleId) -> Result<()> {
        let t = &self.triangulation;
        t.check_triangle(tri)?;
        for k in Side::ALL {
            if let Some(n) = t.neighbor(tri, k) {
                t.check_triangle(n)?;
            }
        }
        if let Some(c) = t.cycle_containing(tri) {
            t.canonical_cycle(c)?;
        }
        let units = t.global_deficit_units();
        if units != 0 {
            return Err(Error::Invariant(format!("global deficit is {units}·π/3 after a move")));
        }
        Ok(())
    }

    /// One full timestep.
    pub fn step(&mut self) -> Result<StepSummary> {
        self.field.rotate_substep();
        self.field.coin_substep(&mut self.triangulation, &self.coins)?;
        for &tri in self.field.support() {
            self.triangulation.mark_dirty(tri);
        }
        let merges = self.apply_merges()?;
        let splits = self.apply_splits()?;
        self.field.compact();
        self.step_index += 1;

        if self.assert_level != AssertLevel::None {
            let n = self.field.total_norm();
            if (n - self.reference_norm).abs() > NORM_TOLERANCE {
                return Err(Error::NormDrift(n, NORM_TOLERANCE));
            }
        }
        if self.assert_level == AssertLevel::Full {
            self.triangulation.check_invariants()?;
        }
        Ok(StepSummary { merges, splits })
    }

    pub fn norm(&self) -> f64 {
        self.field.total_norm()
    }
}
