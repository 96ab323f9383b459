use thiserror::Error;

use crate::grid::{Side, TriangleId, VertexId};

#[derive(Debug, Error)]
pub enum Error {
    #[error("triangle {0} is not live")]
    TriangleNotLive(TriangleId),

    #[error("vertex {0} is not live")]
    VertexNotLive(VertexId),

    #[error("triangles {0:?} do not form a 3-cycle: {1}")]
    NotACycle([TriangleId; 3], String),

    #[error("merged label {0} is not an admissible label")]
    InvalidLabel(String),

    #[error("edge ({tri}, side {side}) has both slots carrying the same spin")]
    SpinConflict { tri: TriangleId, side: Side },

    #[error("translation ray from ({start}, side {side}) revisited triangle {repeated}")]
    RayRevisit {
        start: TriangleId,
        side: Side,
        repeated: TriangleId,
    },

    #[error("matrix {0} is not unitary (deviation {1:e})")]
    NotUnitary(&'static str, f64),

    #[error("norm drifted to {0} (tolerance {1:e})")]
    NormDrift(f64, f64),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
