//! Discrete-time quantum walk on a triangulated surface that rewrites itself.
//!
//! The walker lives on the edges of a labeled triangulation. Each step rotates
//! the components inside every triangle, mixes the two components of every edge
//! with a coin, then lets the walker's probability density reshape the surface:
//! wells whose inner probability fell below `beta` are removed by 3-to-1 moves,
//! and triangles holding more than `alpha` are split by 1-to-3 moves.
//!
//! Modules:
//! - [`grid`]: the labeled surface, lazily materialized, with split/merge moves.
//! - [`walker`]: the field over edge slots, coins and gauge.
//! - [`dynamics`]: move detection, ray translation and the full timestep.
//! - [`observables`]: wells and curvature in a ball, variance, η, heatmaps, fits.
//! - [`flat_oracle`]: independent coordinate-indexed walk on the static grid.
//! - [`cli`]: run configuration, experiment orchestration and file output.

pub mod cli;
pub mod dynamics;
mod error;
pub mod flat_oracle;
pub mod grid;
pub mod observables;
pub mod walker;

pub use error::{Error, Result};

/// Decimal rendering used by every exported file: 16 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.15e}")
}
