use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("unknown length unit tag {0:?} (expected \"cm\" or \"m\")")]
    UnknownUnit(String),
    #[error("floating building: no solid's lowest face lies within {tolerance} m of the ground plane")]
    FloatingBuilding { tolerance: f64 },
    #[error("degenerate footprint: grounded solids project to zero area")]
    DegenerateFootprint,
    #[error("disconnected footprint: grounded solids form {0} separate regions")]
    DisconnectedFootprint(usize),
    #[error("degenerate hull: convex vertex set has no volume")]
    DegenerateHull,
    #[error("solid {id:?}: {reason}")]
    InvalidSolid { id: String, reason: String },
    #[error("unknown material {0:?}")]
    UnknownMaterial(String),
    #[error("material {name:?}: {reason}")]
    InvalidMaterial { name: String, reason: String },
    #[error("scene file: {0}")]
    Scene(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
