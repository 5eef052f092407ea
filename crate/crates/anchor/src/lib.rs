//! Foundation analysis and terrain anchoring.
//!
//! Takes the building footprint, finds where its boundary turns, spreads
//! anchor points along it with spacing limits, weighs each anchor by the
//! building volume it carries, and emits breakable constraints binding the
//! grounded fracture pieces to the terrain.

pub mod constraint;
pub mod error;
pub mod placement;
pub mod types;
pub mod weight;

pub use constraint::{make_constraints, ATTACH_RADIUS, COMPLIANCE, LEVER_ARM};
pub use error::AnchorError;
pub use placement::{analyze_foundation, place_anchors};
pub use types::{AnchorConstraint, AnchorPoint, AnchorSource, WeightMap};
pub use weight::build_weight_map;

/// Parameter defaults. The procedure fixes the shape of the pipeline; these
/// values are calibration choices that give sensible anchor layouts on
/// building-sized footprints.
pub mod defaults {
    /// Degrees a vertex must turn before it counts as a corner.
    pub const ANGLE_THRESHOLD_DEG: f64 = 10.0;
    /// Minimum along-boundary spacing between anchors, m.
    pub const D_MIN: f64 = 1.0;
    /// Maximum unanchored boundary span, m.
    pub const MAX_GAP: f64 = 4.0;
    /// Radius around an anchor that collects weight-map cells, m.
    pub const WEIGHT_RADIUS: f64 = 1.5;
    /// Weight-map grid cell size, m.
    pub const GRID_CELL: f64 = 0.25;
}
