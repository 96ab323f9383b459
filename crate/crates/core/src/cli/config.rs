use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dynamics::{AssertLevel, Thresholds};
use crate::error::{Error, Result};
use crate::grid::{Side, Slot, Triangulation};
use crate::walker::{physical_to_gauged, CoinSet, Field};

/// `beta` as a number, or tied to alpha with the token `"3*alpha"`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum Beta {
    #[default]
    ThreeAlpha,
    Value(f64),
}

const THREE_ALPHA: &str = "3*alpha";

impl Beta {
    pub fn parse(s: &str) -> Result<Beta> {
        if s.trim() == THREE_ALPHA {
            return Ok(Beta::ThreeAlpha);
        }
        s.trim()
            .parse()
            .map(Beta::Value)
            .map_err(|_| Error::Config(format!("beta must be a number or \"{THREE_ALPHA}\", got {s:?}")))
    }
}

impl Serialize for Beta {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Beta::ThreeAlpha => s.serialize_str(THREE_ALPHA),
            Beta::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for Beta {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Beta, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(Beta::Value(v)),
            Raw::Text(s) => Beta::parse(&s).map_err(serde::de::Error::custom),
        }
    }
}

/// One explicitly placed amplitude. `path` lists the sides crossed to reach
/// the triangle from the origin; the value is in the physical gauge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlotValue {
    #[serde(default)]
    pub path: Vec<u8>,
    pub side: u8,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub enum InitialState {
    /// `1/√3` on each side of the origin triangle.
    #[default]
    OriginDefault,
    Slots(Vec<SlotValue>),
}

const ORIGIN_DEFAULT: &str = "origin-default";

impl Serialize for InitialState {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            InitialState::OriginDefault => s.serialize_str(ORIGIN_DEFAULT),
            InitialState::Slots(v) => v.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for InitialState {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<InitialState, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Slots(Vec<SlotValue>),
        }
        match Raw::deserialize(d)? {
            Raw::Text(s) if s == ORIGIN_DEFAULT => Ok(InitialState::OriginDefault),
            Raw::Text(s) => Err(serde::de::Error::custom(format!(
                "initial_state must be \"{ORIGIN_DEFAULT}\" or a list of slots, got {s:?}"
            ))),
            Raw::Slots(v) => Ok(InitialState::Slots(v)),
        }
    }
}

fn side(value: u8) -> Result<Side> {
    Side::new(value).ok_or_else(|| Error::Config(format!("side must be 1, 2 or 3, got {value}")))
}

impl InitialState {
    /// Builds the stored field on `t`, materializing the triangles it names.
    pub fn build(&self, t: &mut Triangulation, coins: &CoinSet) -> Result<Field> {
        let slots = match self {
            InitialState::OriginDefault => return Ok(crate::walker::init_origin_state(t)),
            InitialState::Slots(slots) => slots,
        };
        let mut physical = Field::new();
        for s in slots {
            let mut tri = t.origin();
            for &k in &s.path {
                tri = t.neighbor_mat(tri, side(k)?)?;
            }
            let slot = Slot::new(tri, side(s.side)?);
            if physical.get(slot) != Complex64::new(0.0, 0.0) {
                return Err(Error::Config(format!("initial_state sets slot ({}, {}) twice", slot.tri, slot.side)));
            }
            physical.set(slot, Complex64::new(s.re, s.im));
        }
        physical.compact();
        if physical.total_norm() == 0.0 {
            return Err(Error::Config("initial_state has zero norm".into()));
        }
        for &tri in physical.support().to_vec().iter() {
            for k in Side::ALL {
                t.neighbor_mat(tri, k)?;
            }
        }
        physical_to_gauged(&physical, t, coins)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeatmapConfig {
    pub half_extent: f64,
    pub bins: usize,
    /// Zero writes only the final step.
    pub every_n_steps: u64,
}

impl Default for HeatmapConfig {
    fn default() -> Self {
        HeatmapConfig { half_extent: 30.0, bins: 61, every_n_steps: 100 }
    }
}

/// Run parameters, read from flat JSON. Every field is optional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub alpha: f64,
    pub beta: Beta,
    pub steps: u64,
    /// `W, U1, U2, U3`, each as row-major `(re, im)` pairs.
    pub coins: Option<[[f64; 8]; 4]>,
    pub initial_state: InitialState,
    pub ball_radius: f64,
    pub eta_window: usize,
    pub heatmap: HeatmapConfig,
    /// Zero writes only the final step.
    pub snapshot_every: u64,
    pub out_dir: PathBuf,
    pub max_moments: usize,
    pub assert_level: AssertLevel,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            alpha: 0.01,
            beta: Beta::ThreeAlpha,
            steps: 200,
            coins: None,
            initial_state: InitialState::OriginDefault,
            ball_radius: 1.0,
            eta_window: 5,
            heatmap: HeatmapConfig::default(),
            snapshot_every: 0,
            out_dir: PathBuf::from("out"),
            max_moments: 4,
            assert_level: AssertLevel::Norm,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::from_json(&text)
    }

    /// Thresholds with `beta = 3 alpha` capped at 1 when tied.
    pub fn thresholds(&self) -> Result<Thresholds> {
        match self.beta {
            Beta::ThreeAlpha => Thresholds::paired(self.alpha),
            Beta::Value(b) => Thresholds::new(self.alpha, b),
        }
    }

    pub fn coin_set(&self) -> Result<CoinSet> {
        match self.coins {
            None => Ok(CoinSet::default()),
            Some([w, u1, u2, u3]) => CoinSet::from_reals(w, [u1, u2, u3]),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.thresholds()?;
        self.coin_set()?;
        let fail = |msg: String| Err(Error::Config(msg));
        if self.steps < 1 {
            return fail("steps must be at least 1".into());
        }
        if self.eta_window < 3 || self.eta_window.is_multiple_of(2) {
            return fail(format!("eta_window must be odd and at least 3, got {}", self.eta_window));
        }
        if self.ball_radius.is_nan() || self.ball_radius < 0.0 {
            return fail(format!("ball_radius must be non-negative, got {}", self.ball_radius));
        }
        if self.heatmap.half_extent.is_nan() || self.heatmap.half_extent <= 0.0 || self.heatmap.bins == 0 {
            return fail("heatmap needs half_extent > 0 and bins ≥ 1".into());
        }
        if self.max_moments < 1 {
            return fail("max_moments must be at least 1".into());
        }
        Ok(())
    }
}
