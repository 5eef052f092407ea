use serde::{Deserialize, Serialize};

/// Why a boundary point became an anchor site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorSource {
    /// Convex boundary corner.
    Corner,
    /// Reflex vertex, the boundary turning back on itself.
    Inflection,
    /// Inserted to keep boundary spans under the gap limit.
    Infill,
}

/// A point on the footprint boundary where the building is tied to terrain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnchorPoint {
    pub position: [f64; 2],
    pub source: AnchorSource,
}

/// Column volumes over the footprint bounding box plus the per-anchor
/// weights derived from them. Cells are row-major, `cells[iy * nx + ix]`
/// covering `origin + (ix..ix+1, iy..iy+1) * cell`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightMap {
    pub origin: [f64; 2],
    pub cell: f64,
    pub nx: usize,
    pub ny: usize,
    /// Building volume in the vertical column above each cell, m^3.
    pub cells: Vec<f64>,
    /// Per-anchor normalized weights, summing to 1.
    pub weights: Vec<f64>,
}

impl WeightMap {
    pub fn total_volume(&self) -> f64 {
        self.cells.iter().sum()
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> [f64; 2] {
        [
            self.origin[0] + (ix as f64 + 0.5) * self.cell,
            self.origin[1] + (iy as f64 + 0.5) * self.cell,
        ]
    }
}

/// One terrain binding: a piece held to the moving ground at a point, with
/// impulse budgets past which the binding tears off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorConstraint {
    pub anchor_id: usize,
    /// Fracture piece the anchor holds.
    pub piece_id: u64,
    /// World-space attachment point on the ground plane.
    pub position: [f64; 3],
    /// N*s of accumulated constraint impulse before the anchor breaks.
    pub linear_break_threshold: f64,
    /// N*m*s of accumulated angular impulse before rotation tears free.
    pub angular_break_threshold: f64,
    /// Elastic give of the binding, m/N.
    pub compliance: f64,
}
