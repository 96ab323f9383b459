//! Measurements taken between steps.
//!
//! Positions are edge midpoints in the embedding. A slot's probability is
//! `|ψ̃|²`; summing the two slots of an edge gives the edge's spinor norm,
//! which the gauge does not change, so the stored field is used directly.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::dynamics::SimState;
use crate::error::{Error, Result};
use crate::fmt_real;
use crate::grid::Triangulation;

#[derive(Clone, Debug, PartialEq)]
pub struct ObservableRecord {
    pub step: u64,
    pub norm: f64,
    pub wells_in_ball: usize,
    pub curvature_signed: f64,
    pub curvature_abs: f64,
    pub stats: PositionStats,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PositionStats {
    pub mean_x: f64,
    pub mean_y: f64,
    pub var_x: f64,
    pub var_y: f64,
    pub var_total: f64,
    /// `moments[k - 1] = E[|e − E[e]|^k]`.
    pub moments: Vec<f64>,
}

fn within(p: [f64; 2], radius: f64) -> bool {
    p[0].hypot(p[1]) <= radius
}

/// Surviving split vertices within `radius` of the origin.
pub fn wells_in_ball(t: &Triangulation, radius: f64) -> usize {
    t.well_vertices()
        .iter()
        .filter(|&&v| t.vertex_position(v).is_ok_and(|p| within(p, radius)))
        .count()
}

/// Signed and absolute deficit sums in the ball, in units of π/3.
pub fn curvature_units_in_ball(t: &Triangulation, radius: f64) -> (i64, i64) {
    let mut signed = 0;
    let mut abs = 0;
    for &v in t.curved_vertices() {
        if t.vertex_position(v).is_ok_and(|p| within(p, radius)) {
            let d = t.deficit_units(v).expect("curved vertices are live");
            signed += d;
            abs += d.abs();
        }
    }
    (signed, abs)
}

/// Signed and absolute deficit sums in the ball, in radians.
pub fn curvature_in_ball(t: &Triangulation, radius: f64) -> (f64, f64) {
    let (s, a) = curvature_units_in_ball(t, radius);
    (s as f64 * PI / 3.0, a as f64 * PI / 3.0)
}

/// `(midpoint, probability)` for every nonzero slot, in slot order.
pub fn position_samples(s: &SimState) -> Vec<([f64; 2], f64)> {
    s.field
        .nonzero_slots()
        .map(|(slot, z)| (s.triangulation.slot_position(slot), z.norm_sqr()))
        .collect()
}

/// Mean, variance and radial central moments of a weighted point set.
pub fn stats_from_samples(samples: impl IntoIterator<Item = ([f64; 2], f64)>, max_moment: usize) -> PositionStats {
    let samples: Vec<_> = samples.into_iter().collect();
    let mass: f64 = samples.iter().map(|s| s.1).sum();
    if mass <= 0.0 {
        return PositionStats { moments: vec![0.0; max_moment], ..Default::default() };
    }
    let mean_x = samples.iter().map(|(p, w)| p[0] * w).sum::<f64>() / mass;
    let mean_y = samples.iter().map(|(p, w)| p[1] * w).sum::<f64>() / mass;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    let mut moments = vec![0.0; max_moment];
    for (p, w) in &samples {
        let (dx, dy) = (p[0] - mean_x, p[1] - mean_y);
        var_x += w * dx * dx;
        var_y += w * dy * dy;
        let r = dx.hypot(dy);
        let mut rk = 1.0;
        for m in moments.iter_mut() {
            rk *= r;
            *m += w * rk;
        }
    }
    for m in moments.iter_mut() {
        *m /= mass;
    }
    let (var_x, var_y) = (var_x / mass, var_y / mass);
    PositionStats { mean_x, mean_y, var_x, var_y, var_total: var_x + var_y, moments }
}

pub fn position_stats(s: &SimState, max_moment: usize) -> PositionStats {
    stats_from_samples(position_samples(s), max_moment)
}

pub fn observe(s: &SimState, ball_radius: f64, max_moment: usize) -> ObservableRecord {
    let (curvature_signed, curvature_abs) = curvature_in_ball(&s.triangulation, ball_radius);
    ObservableRecord {
        step: s.step_index,
        norm: s.norm(),
        wells_in_ball: wells_in_ball(&s.triangulation, ball_radius),
        curvature_signed,
        curvature_abs,
        stats: position_stats(s, max_moment),
    }
}

fn check_window(window: usize) -> Result<()> {
    if window < 3 || window.is_multiple_of(2) {
        return Err(Error::Config(format!("eta window must be odd and at least 3, got {window}")));
    }
    Ok(())
}

/// Centered least-squares slope of `ln var` against `ln t` over a sliding
/// window. Points with `t = 0` or `var <= 0` are skipped.
pub fn eta_from_variance(series: &[(u64, f64)], window: usize) -> Result<Vec<(u64, f64)>> {
    check_window(window)?;
    let pts: Vec<(u64, f64, f64)> = series
        .iter()
        .filter(|(t, v)| *t >= 1 && *v > 0.0)
        .map(|&(t, v)| (t, (t as f64).ln(), v.ln()))
        .collect();
    let half = window / 2;
    if pts.len() < window {
        return Ok(Vec::new());
    }
    Ok((half..pts.len() - half)
        .map(|i| {
            let w = &pts[i - half..=i + half];
            let n = w.len() as f64;
            let mx = w.iter().map(|p| p.1).sum::<f64>() / n;
            let my = w.iter().map(|p| p.2).sum::<f64>() / n;
            let sxy: f64 = w.iter().map(|p| (p.1 - mx) * (p.2 - my)).sum();
            let sxx: f64 = w.iter().map(|p| (p.1 - mx).powi(2)).sum();
            (pts[i].0, sxy / sxx)
        })
        .collect())
}

pub fn eta_series(records: &[ObservableRecord], window: usize) -> Result<Vec<(u64, f64)>> {
    let var: Vec<(u64, f64)> = records.iter().map(|r| (r.step, r.stats.var_total)).collect();
    eta_from_variance(&var, window)
}

/// Bins probability mass on `[−h, h]²`. Row `r` covers increasing `y`, so
/// printing rows top to bottom puts `y` increasing downward. Mass outside the
/// square lands in the nearest border bin.
pub fn heatmap_from_samples(
    samples: impl IntoIterator<Item = ([f64; 2], f64)>,
    half_extent: f64,
    bins: usize,
) -> Vec<Vec<f64>> {
    let mut grid = vec![vec![0.0; bins]; bins];
    let index = |c: f64| {
        let u = ((c + half_extent) / (2.0 * half_extent) * bins as f64).floor();
        u.clamp(0.0, (bins - 1) as f64) as usize
    };
    for (p, w) in samples {
        grid[index(p[1])][index(p[0])] += w;
    }
    grid
}

pub fn heatmap(s: &SimState, half_extent: f64, bins: usize) -> Vec<Vec<f64>> {
    heatmap_from_samples(position_samples(s), half_extent, bins)
}

pub fn write_heatmap_csv<W: Write>(grid: &[Vec<f64>], mut out: W) -> Result<()> {
    for row in grid {
        let cells: Vec<String> = row.iter().map(|&v| fmt_real(v)).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub tmax: u64,
    /// Root mean square of the log-space residuals.
    pub residual: f64,
    pub degenerate: bool,
}

/// Minimum number of positive points for a fit.
const MIN_FIT_POINTS: usize = 5;

/// Fits `wells ≈ c · t^a · e^{−b t²}` by least squares on `ln wells` over the
/// strictly positive entries.
pub fn fit_well_curve(series: &[(u64, f64)]) -> FitResult {
    let tmax = series.iter().filter(|(_, w)| *w > 1.0).map(|(t, _)| *t).max().unwrap_or(0);
    let pts: Vec<(f64, f64)> =
        series.iter().filter(|(t, w)| *t >= 1 && *w > 0.0).map(|&(t, w)| (t as f64, w.ln())).collect();
    let degenerate = FitResult { a: 0.0, b: 0.0, c: 0.0, tmax, residual: 0.0, degenerate: true };
    if pts.len() < MIN_FIT_POINTS {
        return degenerate;
    }

    let n = pts.len();
    let mut x = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => pts[i].0.ln(),
        1 => -pts[i].0 * pts[i].0,
        _ => 1.0,
    });
    let y = DVector::from_iterator(n, pts.iter().map(|p| p.1));
    let scale: Vec<f64> = (0..3).map(|j| x.column(j).amax().max(f64::MIN_POSITIVE)).collect();
    for (j, s) in scale.iter().enumerate() {
        x.column_mut(j).scale_mut(1.0 / s);
    }
    let Ok(beta) = x.clone().svd(true, true).solve(&y, 1e-12) else {
        return degenerate;
    };
    let coef: Vec<f64> = (0..3).map(|j| beta[j] / scale[j]).collect();
    let resid = &x * &beta - &y;
    FitResult {
        a: coef[0],
        b: coef[1],
        c: coef[2].exp(),
        tmax,
        residual: (resid.norm_squared() / n as f64).sqrt(),
        degenerate: false,
    }
}

/// Writes the per-step time series; `eta` is empty where the window does not fit.
pub fn write_timeseries_csv<W: Write>(records: &[ObservableRecord], eta: &[(u64, f64)], mut out: W) -> Result<()> {
    writeln!(out, "step,norm,wells_in_ball,curvature_signed,curvature_abs,mean_x,mean_y,var_x,var_y,var_total,eta")?;
    let mut eta = eta.iter().peekable();
    for r in records {
        while eta.peek().is_some_and(|e| e.0 < r.step) {
            eta.next();
        }
        let e = match eta.peek() {
            Some(&&(t, v)) if t == r.step => fmt_real(v),
            _ => String::new(),
        };
        let s = &r.stats;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.step,
            fmt_real(r.norm),
            r.wells_in_ball,
            fmt_real(r.curvature_signed),
            fmt_real(r.curvature_abs),
            fmt_real(s.mean_x),
            fmt_real(s.mean_y),
            fmt_real(s.var_x),
            fmt_real(s.var_y),
            fmt_real(s.var_total),
            e
        )?;
    }
    Ok(())
}

/// Writes `step,m1,…,mK` with the radial central moments of each record.
pub fn write_moments_csv<W: Write>(records: &[ObservableRecord], mut out: W) -> Result<()> {
    let k = records.first().map_or(0, |r| r.stats.moments.len());
    let header: Vec<String> = std::iter::once("step".to_string()).chain((1..=k).map(|i| format!("m{i}"))).collect();
    writeln!(out, "{}", header.join(","))?;
    for r in records {
        let row: Vec<String> =
            std::iter::once(r.step.to_string()).chain(r.stats.moments.iter().map(|&m| fmt_real(m))).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Thresholds;
    use crate::grid::{Side, Slot};
    use crate::walker::{CoinSet, Field};
    use num_complex::Complex64;

    fn fresh(alpha: f64, beta: f64) -> SimState {
        SimState::new(CoinSet::default(), Thresholds::new(alpha, beta).unwrap())
    }

    #[test]
    fn flat_grid_has_no_wells_or_curvature() {
        let s = fresh(1.0, 0.0);
        assert_eq!(wells_in_ball(&s.triangulation, 1.0), 0);
        assert_eq!(curvature_in_ball(&s.triangulation, 1.0), (0.0, 0.0));
    }

    #[test]
    fn one_well_in_the_ball() {
        let mut s = fresh(0.5, 0.0);
        s.step().unwrap();
        assert_eq!(wells_in_ball(&s.triangulation, 1.0), 1);
        assert_eq!(curvature_units_in_ball(&s.triangulation, 1.0), (0, 6));
        let (signed, abs) = curvature_in_ball(&s.triangulation, 1.0);
        assert_eq!(signed, 0.0);
        assert!((abs - 2.0 * PI).abs() < 1e-12);
        assert_eq!(curvature_units_in_ball(&s.triangulation, 1e9).0, 0);

        s.thresholds = Thresholds::new(1.0, 1.0).unwrap();
        let cycle = s.triangulation.find_3cycles()[0];
        s.field = Field::new();
        s.translate_out(cycle).unwrap();
        s.triangulation.merge_3to1(cycle).unwrap();
        assert_eq!(wells_in_ball(&s.triangulation, 1.0), 0);
    }

    #[test]
    fn initial_state_statistics() {
        let s = fresh(1.0, 0.0);
        let st = position_stats(&s, 4);
        assert!(st.mean_x.abs() < 1e-15 && st.mean_y.abs() < 1e-15);
        // Midpoints of the origin's edges sit at distance 1/(2√3) from its centroid.
        let r2 = 1.0 / 12.0;
        assert!((st.var_total - r2).abs() < 1e-15);
        assert!((st.var_x - r2 / 2.0).abs() < 1e-15 && (st.var_y - r2 / 2.0).abs() < 1e-15);
        assert!((st.moments[0] - r2.sqrt()).abs() < 1e-15);
        assert!((st.moments[1] - st.var_total).abs() < 1e-15);
        let mass: f64 = position_samples(&s).iter().map(|p| p.1).sum();
        assert!((mass - s.norm()).abs() < 1e-12);
    }

    #[test]
    fn single_edge_has_zero_variance() {
        let mut s = fresh(1.0, 0.0);
        s.field = Field::new();
        s.field.set(Slot::new(s.triangulation.origin(), Side::TWO), Complex64::new(1.0, 0.0));
        let st = position_stats(&s, 3);
        assert_eq!(st.var_total, 0.0);
        assert!(st.moments.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn eta_of_power_laws() {
        let quad: Vec<(u64, f64)> = (1..=20).map(|t| (t, (t * t) as f64)).collect();
        let e = eta_from_variance(&quad, 5).unwrap();
        assert_eq!(e.len(), 16);
        assert_eq!(e[0].0, 3);
        assert!(e.iter().all(|(_, v)| (v - 2.0).abs() < 1e-12));
        let flat: Vec<(u64, f64)> = (1..=10).map(|t| (t, 3.5)).collect();
        assert!(eta_from_variance(&flat, 3).unwrap().iter().all(|(_, v)| v.abs() < 1e-12));
        assert!(eta_from_variance(&quad[..4], 5).unwrap().is_empty());
        assert!(eta_from_variance(&quad, 4).is_err());
        let with_zero: Vec<(u64, f64)> = (0..=6).map(|t| (t, (t * t) as f64)).collect();
        assert_eq!(eta_from_variance(&with_zero, 3).unwrap().len(), 4);
    }

    #[test]
    fn heatmap_conserves_mass_and_clamps() {
        let s = fresh(1.0, 0.0);
        let g = heatmap(&s, 2.0, 4);
        let total: f64 = g.iter().flatten().sum();
        assert!((total - 1.0).abs() < 1e-12);

        let g = heatmap_from_samples([([0.1, 0.1], 1.0), ([5.0, -9.0], 0.5)], 1.0, 3);
        assert_eq!(g[1][1], 1.0);
        assert_eq!(g[0][2], 0.5);
        assert_eq!(g.iter().flatten().filter(|&&v| v != 0.0).count(), 2);
    }

    #[test]
    fn fit_recovers_exact_model() {
        let (a, b, c) = (1.5, 0.01, 4.0);
        let series: Vec<(u64, f64)> =
            (1..=40).map(|t| (t, c * (t as f64).powf(a) * (-b * (t * t) as f64).exp())).collect();
        let f = fit_well_curve(&series);
        assert!(!f.degenerate);
        assert!((f.a - a).abs() < 1e-6 && (f.b - b).abs() < 1e-6 && (f.c - c).abs() < 1e-6, "{f:?}");
        assert!(f.residual < 1e-9);
        let last_above_one = series.iter().filter(|p| p.1 > 1.0).map(|p| p.0).max().unwrap();
        assert_eq!(f.tmax, last_above_one);
    }

    #[test]
    fn fit_of_empty_series_is_degenerate() {
        let f = fit_well_curve(&[(1, 0.0), (2, 0.0), (3, 0.0)]);
        assert!(f.degenerate);
        assert_eq!((f.a, f.b, f.c, f.tmax), (0.0, 0.0, 0.0, 0));
    }

    #[test]
    fn timeseries_has_blank_eta_until_window() {
        let mut s = fresh(1.0, 0.0);
        let mut recs = vec![observe(&s, 1.0, 2)];
        for _ in 0..6 {
            s.step().unwrap();
            recs.push(observe(&s, 1.0, 2));
        }
        let eta = eta_series(&recs, 3).unwrap();
        let mut buf = Vec::new();
        write_timeseries_csv(&recs, &eta, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 8);
        assert!(lines[1].ends_with(',') && lines[2].ends_with(','));
        assert!(!lines[3].ends_with(','));
        assert!(lines[7].ends_with(','));
        assert!(lines.iter().all(|l| l.split(',').count() == 11));
    }
}
