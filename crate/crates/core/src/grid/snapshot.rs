//! JSON export of the triangulation.

use serde::Serialize;
use serde_json::value::RawValue;

use super::{Side, Triangulation};
use crate::fmt_real;

#[derive(Debug, Serialize)]
pub struct TriangleRecord {
    pub id: u32,
    pub label: String,
    /// `[neighbor id, side]` for sides 1, 2, 3; `null` where not materialized.
    pub neighbors: Vec<Option<(u32, u8)>>,
    pub corners: [u32; 3],
}

#[derive(Debug, Serialize)]
pub struct VertexRecord {
    pub id: u32,
    pub x: Box<RawValue>,
    pub y: Box<RawValue>,
    pub incidence: u32,
    pub is_well: bool,
}

/// Whole-surface snapshot; keys serialize in declaration order.
#[derive(Debug, Serialize)]
pub struct GraphSnapshot {
    pub origin: u32,
    pub triangles: Vec<TriangleRecord>,
    pub vertices: Vec<VertexRecord>,
}

fn raw(x: f64) -> Box<RawValue> {
    RawValue::from_string(fmt_real(x)).expect("formatted float is valid JSON")
}

impl GraphSnapshot {
    pub fn capture(t: &Triangulation) -> GraphSnapshot {
        let triangles = t
            .live_triangles()
            .map(|id| {
                let rec = &t.tris[id.index()];
                TriangleRecord {
                    id: id.raw(),
                    label: rec.label.code(),
                    neighbors: Side::ALL
                        .iter()
                        .map(|k| rec.adj[k.idx()].map(|n| (n.raw(), k.get())))
                        .collect(),
                    corners: rec.corners.map(|v| v.raw()),
                }
            })
            .collect();
        let vertices = t
            .live_vertices()
            .map(|v| {
                let rec = &t.verts[v.index()];
                VertexRecord {
                    id: v.raw(),
                    x: raw(rec.pos[0]),
                    y: raw(rec.pos[1]),
                    incidence: rec.incidence,
                    is_well: t.well_vertices.contains(&v),
                }
            })
            .collect();
        GraphSnapshot { origin: t.origin.raw(), triangles, vertices }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("snapshot serializes")
    }
}
