use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnchorError {
    #[error("footprint has {0} vertices, need at least 3")]
    DegenerateFootprint(usize),

    #[error("candidate ({0}, {1}) is {2} m off the footprint boundary")]
    CandidateOffBoundary(f64, f64, f64),

    #[error("{0} must be positive, got {1}")]
    NonPositiveParameter(&'static str, f64),

    #[error("max_gap {max_gap} is smaller than d_min {d_min}")]
    GapBelowMinimum { d_min: f64, max_gap: f64 },

    #[error("weight map covers no building volume")]
    ZeroVolume,

    #[error("no building volume within {radius} m of any anchor")]
    NoVolumeNearAnchors { radius: f64 },

    #[error("{anchors} anchors but {weights} weights")]
    WeightCountMismatch { anchors: usize, weights: usize },

    #[error("anchor {anchor_id} at ({x}, {y}): anchor off foundation (no grounded piece within {radius} m)")]
    AnchorOffFoundation {
        anchor_id: usize,
        x: f64,
        y: f64,
        radius: f64,
    },
}
