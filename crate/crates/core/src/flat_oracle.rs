//! Reference walk on the static triangular grid, indexed by lattice cell.
//!
//! Up-cells carry ↑ on all three sides, down-cells ↓. Neighbors come from a
//! fixed offset table instead of a glued graph, so agreement with the dynamic
//! engine at `alpha = 1` checks the graph machinery against plain coordinates.

use std::collections::BTreeMap;

use nalgebra::Vector2;
use num_complex::Complex64;

use crate::grid::{Cell, Orientation, Side};
use crate::walker::{CoinSet, PRUNE_THRESHOLD};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Cell across side `k`.
pub fn neighbor(cell: Cell, side: Side) -> Cell {
    let Cell { i, j, orientation } = cell;
    match (orientation, side.get()) {
        (Orientation::Up, 1) => Cell::down(i, j - 1),
        (Orientation::Up, 2) => Cell::down(i - 1, j),
        (Orientation::Up, _) => Cell::down(i, j),
        (Orientation::Down, 1) => Cell::up(i, j + 1),
        (Orientation::Down, 2) => Cell::up(i + 1, j),
        (Orientation::Down, _) => Cell::up(i, j),
    }
}

fn point(i: i64, j: i64) -> [f64; 2] {
    [i as f64 + 0.5 * j as f64 - 0.5, SQRT3 * (0.5 * j as f64 - 1.0 / 6.0)]
}

/// Midpoint of side `k` of a cell.
pub fn edge_midpoint(cell: Cell, side: Side) -> [f64; 2] {
    let Cell { i, j, orientation } = cell;
    let (a, b) = match (orientation, side.get()) {
        (Orientation::Up, 1) => (point(i, j), point(i + 1, j)),
        (Orientation::Up, 2) => (point(i, j), point(i, j + 1)),
        (Orientation::Up, _) => (point(i + 1, j), point(i, j + 1)),
        (Orientation::Down, 1) => (point(i, j + 1), point(i + 1, j + 1)),
        (Orientation::Down, 2) => (point(i + 1, j), point(i + 1, j + 1)),
        (Orientation::Down, _) => (point(i + 1, j), point(i, j + 1)),
    };
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Empty cells kept between the support and the edge of the stored box.
const MARGIN: i64 = 2;

/// Dense amplitudes over a box of lattice cells `[i0, i0 + width) × [j0, j0 + height)`,
/// one array for up-cells and one for down-cells. The box grows as the walk spreads.
#[derive(Clone, Debug)]
pub struct FlatState {
    i0: i64,
    j0: i64,
    width: i64,
    height: i64,
    up: Vec<[Complex64; 3]>,
    down: Vec<[Complex64; 3]>,
    coins: CoinSet,
}

impl FlatState {
    pub fn empty(coins: CoinSet) -> FlatState {
        FlatState { i0: 0, j0: 0, width: 0, height: 0, up: Vec::new(), down: Vec::new(), coins }
    }

    /// `1/√3` on each side of the up-cell `(0, 0)`.
    pub fn standard(coins: CoinSet) -> FlatState {
        let mut s = FlatState::empty(coins);
        let a = Complex64::new(1.0 / 3f64.sqrt(), 0.0);
        for k in Side::ALL {
            s.set(Cell::ORIGIN, k, a);
        }
        s
    }

    fn index(&self, i: i64, j: i64) -> Option<usize> {
        let (di, dj) = (i - self.i0, j - self.j0);
        (0..self.width).contains(&di).then_some(())?;
        (0..self.height).contains(&dj).then_some(())?;
        Some((dj * self.width + di) as usize)
    }

    fn array(&self, o: Orientation) -> &Vec<[Complex64; 3]> {
        match o {
            Orientation::Up => &self.up,
            Orientation::Down => &self.down,
        }
    }

    pub fn get(&self, cell: Cell, side: Side) -> Complex64 {
        self.index(cell.i, cell.j).map_or(ZERO, |n| self.array(cell.orientation)[n][side.idx()])
    }

    pub fn set(&mut self, cell: Cell, side: Side, value: Complex64) {
        self.cover(cell.i, cell.j, cell.i, cell.j);
        let n = self.index(cell.i, cell.j).expect("box covers the cell");
        match cell.orientation {
            Orientation::Up => self.up[n][side.idx()] = value,
            Orientation::Down => self.down[n][side.idx()] = value,
        }
    }

    /// Grows the box so that it contains `[imin, imax] × [jmin, jmax]` plus the margin.
    fn cover(&mut self, imin: i64, jmin: i64, imax: i64, jmax: i64) {
        let inside = self.width > 0
            && imin - MARGIN >= self.i0
            && jmin - MARGIN >= self.j0
            && imax + MARGIN < self.i0 + self.width
            && jmax + MARGIN < self.j0 + self.height;
        if inside {
            return;
        }
        let pad = 4 * MARGIN + self.width.max(self.height) / 4;
        let (ni0, nj0) = if self.width > 0 {
            ((imin - pad).min(self.i0), (jmin - pad).min(self.j0))
        } else {
            (imin - pad, jmin - pad)
        };
        let ni1 = if self.width > 0 { (imax + pad + 1).max(self.i0 + self.width) } else { imax + pad + 1 };
        let nj1 = if self.width > 0 { (jmax + pad + 1).max(self.j0 + self.height) } else { jmax + pad + 1 };
        let (nw, nh) = (ni1 - ni0, nj1 - nj0);
        let mut up = vec![[ZERO; 3]; (nw * nh) as usize];
        let mut down = up.clone();
        for dj in 0..self.height {
            for di in 0..self.width {
                let old = (dj * self.width + di) as usize;
                let new = ((dj + self.j0 - nj0) * nw + di + self.i0 - ni0) as usize;
                up[new] = self.up[old];
                down[new] = self.down[old];
            }
        }
        *self = FlatState { i0: ni0, j0: nj0, width: nw, height: nh, up, down, coins: self.coins.clone() };
    }

    fn cell_at(&self, n: usize, orientation: Orientation) -> Cell {
        let n = n as i64;
        Cell { i: self.i0 + n % self.width, j: self.j0 + n / self.width, orientation }
    }

    fn nonzero(&self) -> impl Iterator<Item = (Cell, Side, Complex64)> + '_ {
        [(Orientation::Up, &self.up), (Orientation::Down, &self.down)].into_iter().flat_map(move |(o, arr)| {
            arr.iter().enumerate().flat_map(move |(n, a)| {
                Side::ALL.into_iter().filter(move |k| a[k.idx()] != ZERO).map(move |k| (self.cell_at(n, o), k, a[k.idx()]))
            })
        })
    }

    pub fn support_len(&self) -> usize {
        self.nonzero().count()
    }

    pub fn norm(&self) -> f64 {
        self.up.iter().chain(&self.down).flatten().map(|z| z.norm_sqr()).sum()
    }

    /// All nonzero slots, ordered.
    pub fn slots(&self) -> BTreeMap<(Cell, Side), Complex64> {
        self.nonzero().map(|(c, k, z)| ((c, k), z)).collect()
    }

    /// `(edge midpoint, |ψ̃|²)` for every nonzero slot.
    pub fn position_samples(&self) -> Vec<([f64; 2], f64)> {
        self.nonzero().map(|(cell, side, z)| (edge_midpoint(cell, side), z.norm_sqr())).collect()
    }

    /// One rotation substep followed by one coin substep.
    pub fn step(&mut self) {
        for a in self.up.iter_mut().chain(self.down.iter_mut()) {
            *a = [a[2], a[0], a[1]];
        }

        // Every edge is visited from its up-cell. The margin keeps all nonzero
        // slots away from the box edge, so partners outside the box are empty.
        let w = *self.coins.w();
        let mut bounds = (i64::MAX, i64::MAX, i64::MIN, i64::MIN);
        for n in 0..self.up.len() {
            let cell = self.cell_at(n, Orientation::Up);
            for k in Side::ALL {
                let Some(m) = ({
                    let d = neighbor(cell, k);
                    self.index(d.i, d.j)
                }) else {
                    continue;
                };
                let (u, d) = (self.up[n][k.idx()], self.down[m][k.idx()]);
                if u == ZERO && d == ZERO {
                    continue;
                }
                let out = w * Vector2::new(u, d);
                let prune = |z: Complex64| if z.norm() < PRUNE_THRESHOLD { ZERO } else { z };
                self.up[n][k.idx()] = prune(out[0]);
                self.down[m][k.idx()] = prune(out[1]);
                bounds = (bounds.0.min(cell.i), bounds.1.min(cell.j), bounds.2.max(cell.i), bounds.3.max(cell.j));
            }
        }
        if bounds.0 <= bounds.2 {
            self.cover(bounds.0 - 1, bounds.1 - 1, bounds.2 + 1, bounds.3 + 1);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::{eta_from_variance, stats_from_samples};

    #[test]
    fn neighbor_table_is_involutive() {
        for cell in [Cell::up(0, 0), Cell::down(-2, 5), Cell::up(7, -3)] {
            for k in Side::ALL {
                assert_eq!(neighbor(neighbor(cell, k), k), cell);
                assert_eq!(edge_midpoint(cell, k), edge_midpoint(neighbor(cell, k), k));
            }
        }
    }

    #[test]
    fn identity_coin_period_three() {
        let mut s = FlatState::standard(CoinSet::identity());
        let start = s.slots();
        for _ in 0..3 {
            s.step();
        }
        assert_eq!(s.slots(), start);
        assert!((s.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unitary_over_many_steps() {
        let mut s = FlatState::standard(CoinSet::default());
        let n0 = s.norm();
        for _ in 0..300 {
            s.step();
        }
        assert!((s.norm() - n0).abs() < 1e-12);
    }

    #[test]
    fn variance_grows_ballistically() {
        let mut s = FlatState::standard(CoinSet::default());
        let mut var = Vec::new();
        for t in 1..=100u64 {
            s.step();
            var.push((t, stats_from_samples(s.position_samples(), 2).var_total));
        }
        let eta = eta_from_variance(&var, 5).unwrap();
        let late: Vec<f64> = eta.iter().rev().take(10).map(|e| e.1).collect();
        for e in late {
            assert!((1.9..=2.1).contains(&e), "eta = {e}");
        }
    }
}
