//! Run orchestration and file output.
//!
//! A run writes into `out_dir`:
//! - `timeseries.csv`: one row per step, starting at step 0;
//! - `moments.csv`: radial central moments per step;
//! - `movelog.csv`: every applied move;
//! - `heatmap_<t>.csv`: every `heatmap.every_n_steps` steps and at the last step;
//! - `graph_<t>.json`, `field_<t>.csv`: every `snapshot_every` steps and at the last step;
//! - `fit.json`: well-curve fit over the whole run.
//!
//! A sweep runs one such directory per alpha (`alpha_<value>`) and collects
//! the fits in `sweep.csv`.

mod config;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::thread;

pub use config::{Beta, HeatmapConfig, InitialState, RunConfig, SlotValue};

use crate::dynamics::{SimState, INITIAL_RADIUS};
use crate::error::{Error, Result};
use crate::fmt_real;
use crate::grid::Triangulation;
use crate::observables::{
    eta_series, fit_well_curve, heatmap, observe, write_heatmap_csv, write_moments_csv, write_timeseries_csv,
    FitResult, ObservableRecord,
};
use crate::walker::write_field_csv;

/// Command-line values that take precedence over the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub steps: Option<u64>,
    pub alpha: Option<f64>,
    pub beta: Option<Beta>,
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn with_overrides(mut self, o: &Overrides) -> RunConfig {
        if let Some(v) = o.steps {
            self.steps = v;
        }
        if let Some(v) = o.alpha {
            self.alpha = v;
        }
        if let Some(v) = o.beta {
            self.beta = v;
        }
        if let Some(v) = &o.out_dir {
            self.out_dir = v.clone();
        }
        self
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub records: Vec<ObservableRecord>,
    pub fit: FitResult,
    pub moves: usize,
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn due(step: u64, every: u64, last: u64) -> bool {
    step == last || (every > 0 && step.is_multiple_of(every))
}

/// Builds the initial state described by `config`.
pub fn initial_state(config: &RunConfig) -> Result<SimState> {
    config.validate()?;
    let coins = config.coin_set()?;
    let mut t = Triangulation::new_flat(INITIAL_RADIUS);
    let field = config.initial_state.build(&mut t, &coins)?;
    Ok(SimState::with_field(t, field, coins, config.thresholds()?).with_assert_level(config.assert_level))
}

/// Executes a full run and writes its outputs. On a failed step the series
/// recorded so far are still written before the error is returned.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    let mut s = initial_state(config)?;
    let dir = &config.out_dir;
    fs::create_dir_all(dir)?;

    let mut records = vec![observe(&s, config.ball_radius, config.max_moments)];
    let outcome = advance(&mut s, &mut records, config);

    let eta = eta_series(&records, config.eta_window)?;
    let mut out = create(dir, "timeseries.csv")?;
    write_timeseries_csv(&records, &eta, &mut out)?;
    out.flush()?;
    let mut out = create(dir, "moments.csv")?;
    write_moments_csv(&records, &mut out)?;
    out.flush()?;
    let mut out = create(dir, "movelog.csv")?;
    s.move_log.write_csv(&mut out)?;
    out.flush()?;
    outcome?;

    let wells: Vec<(u64, f64)> = records.iter().map(|r| (r.step, r.wells_in_ball as f64)).collect();
    let fit = fit_well_curve(&wells);
    fs::write(dir.join("fit.json"), serde_json::to_string_pretty(&fit)? + "\n")?;
    Ok(RunOutcome { records, fit, moves: s.move_log.len() })
}

fn advance(s: &mut SimState, records: &mut Vec<ObservableRecord>, config: &RunConfig) -> Result<()> {
    let dir = &config.out_dir;
    for _ in 0..config.steps {
        s.step()?;
        let t = s.step_index;
        records.push(observe(s, config.ball_radius, config.max_moments));
        if due(t, config.heatmap.every_n_steps, config.steps) {
            let grid = heatmap(s, config.heatmap.half_extent, config.heatmap.bins);
            let mut out = create(dir, &format!("heatmap_{t}.csv"))?;
            write_heatmap_csv(&grid, &mut out)?;
            out.flush()?;
        }
        if due(t, config.snapshot_every, config.steps) {
            fs::write(dir.join(format!("graph_{t}.json")), s.triangulation.snapshot().to_json() + "\n")?;
            let mut out = create(dir, &format!("field_{t}.csv"))?;
            write_field_csv(&s.field, &s.triangulation, &s.coins, &mut out)?;
            out.flush()?;
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub alpha: f64,
    pub fit: FitResult,
}

/// Directory name of one sweep entry.
pub fn sweep_dir(alpha: f64) -> String {
    format!("alpha_{alpha:e}")
}

/// Runs every alpha with `beta = 3 alpha` in parallel and writes `sweep.csv`.
/// Degenerate fits leave `a`, `b`, `c` and `residual` empty.
pub fn sweep(alphas: &[f64], base: &RunConfig) -> Result<Vec<SweepRow>> {
    if alphas.is_empty() {
        return Err(Error::Config("sweep needs at least one alpha".into()));
    }
    if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && **a <= 1.0)) {
        return Err(Error::Config(format!("sweep alphas must lie in (0, 1], got {a}")));
    }
    fs::create_dir_all(&base.out_dir)?;

    let results: Vec<Result<FitResult>> = thread::scope(|scope| {
        let handles: Vec<_> = alphas
            .iter()
            .map(|&alpha| {
                let config = RunConfig {
                    alpha,
                    beta: Beta::ThreeAlpha,
                    out_dir: base.out_dir.join(sweep_dir(alpha)),
                    ..base.clone()
                };
                scope.spawn(move || run(&config).map(|o| o.fit))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::Invariant("sweep worker panicked".into()))))
            .collect()
    });

    let mut rows = Vec::with_capacity(alphas.len());
    for (&alpha, fit) in alphas.iter().zip(results) {
        rows.push(SweepRow { alpha, fit: fit? });
    }
    let mut out = create(&base.out_dir, "sweep.csv")?;
    writeln!(out, "alpha,a,b,c,tmax,residual")?;
    for r in &rows {
        let f = &r.fit;
        let num = |x: f64| if f.degenerate { String::new() } else { fmt_real(x) };
        writeln!(out, "{},{},{},{},{},{}", fmt_real(r.alpha), num(f.a), num(f.b), num(f.c), f.tmax, num(f.residual))?;
    }
    out.flush()?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_tokens() {
        let c = RunConfig::from_json("{}").unwrap();
        assert_eq!(c, RunConfig::default());
        let c = RunConfig::from_json(r#"{"alpha": 0.2, "beta": "3*alpha"}"#).unwrap();
        assert_eq!(c.thresholds().unwrap().beta(), 0.6000000000000001);
        let c = RunConfig::from_json(r#"{"alpha": 0.5, "beta": 0.25}"#).unwrap();
        assert_eq!(c.thresholds().unwrap().beta(), 0.25);
        assert!(RunConfig::from_json(r#"{"beta": "2*alpha"}"#).is_err());
        assert!(RunConfig::from_json(r#"{"unknown": 1}"#).is_err());
    }

    #[test]
    fn config_validation() {
        let bad = [
            r#"{"alpha": 1.5}"#,
            r#"{"steps": 0}"#,
            r#"{"eta_window": 4}"#,
            r#"{"coins": [[1,0,0,0,0,0,2,0],[1,0,0,0,0,0,1,0],[1,0,0,0,0,0,1,0],[1,0,0,0,0,0,1,0]]}"#,
        ];
        for text in bad {
            let c = RunConfig::from_json(text).unwrap();
            assert!(c.validate().is_err(), "{text}");
        }
        assert!(RunConfig::default().validate().is_ok());
    }

    #[test]
    fn explicit_initial_state() {
        let text = r#"{"initial_state": [
            {"path": [], "side": 1, "re": 0.6, "im": 0.0},
            {"path": [3, 1], "side": 2, "re": 0.0, "im": 0.8}
        ]}"#;
        let c = RunConfig::from_json(text).unwrap();
        let s = initial_state(&c).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-15);
        assert_eq!(s.field.support().len(), 2);

        let dup = r#"{"initial_state": [
            {"side": 1, "re": 0.6, "im": 0.0},
            {"side": 1, "re": 0.1, "im": 0.0}
        ]}"#;
        assert!(initial_state(&RunConfig::from_json(dup).unwrap()).is_err());
        assert!(RunConfig::from_json(r#"{"initial_state": "elsewhere"}"#).is_err());
    }

    #[test]
    fn overrides_take_precedence() {
        let o = Overrides { steps: Some(7), alpha: Some(0.3), beta: Some(Beta::Value(0.1)), out_dir: None };
        let c = RunConfig::default().with_overrides(&o);
        assert_eq!((c.steps, c.alpha, c.beta), (7, 0.3, Beta::Value(0.1)));
        assert_eq!(Beta::parse("3*alpha").unwrap(), Beta::ThreeAlpha);
        assert_eq!(Beta::parse("0.4").unwrap(), Beta::Value(0.4));
    }
}
