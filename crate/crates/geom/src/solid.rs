//! Building solids: boxes and extruded convex polygons with a world pose.

use serde::{Deserialize, Serialize};

use crate::error::GeomError;
use crate::polytope::ConvexPolytope;
use crate::{Iso3, Quat, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LengthUnit {
    Cm,
    M,
}

impl LengthUnit {
    pub fn parse(tag: &str) -> Result<Self, GeomError> {
        match tag {
            "cm" => Ok(Self::Cm),
            "m" => Ok(Self::M),
            other => Err(GeomError::UnknownUnit(other.to_string())),
        }
    }

    /// Factor converting this unit to meters.
    pub fn scale_to_m(self) -> f64 {
        match self {
            Self::Cm => 0.01,
            Self::M => 1.0,
        }
    }
}

/// Position plus orientation; all geometry is (position, orientation) applied
/// to the solid's local frame, whose origin is the base reference corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vec3,
    pub orientation: Quat,
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            position: Vec3::zeros(),
            orientation: Quat::identity(),
        }
    }

    pub fn translation(position: Vec3) -> Self {
        Self {
            position,
            orientation: Quat::identity(),
        }
    }

    pub fn isometry(&self) -> Iso3 {
        Iso3::from_parts(self.position.into(), self.orientation)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// Axis-aligned box in local frame, minimum corner at the local origin.
    Box { size: Vec3 },
    /// CCW convex polygon in the local xy plane extruded upward by `height`.
    Extrusion { polygon: Vec<[f64; 2]>, height: f64 },
}

impl Shape {
    pub fn scaled(&self, factor: f64) -> Shape {
        match self {
            Shape::Box { size } => Shape::Box { size: size * factor },
            Shape::Extrusion { polygon, height } => Shape::Extrusion {
                polygon: polygon
                    .iter()
                    .map(|p| [p[0] * factor, p[1] * factor])
                    .collect(),
                height: height * factor,
            },
        }
    }

    pub fn polytope(&self) -> ConvexPolytope {
        match self {
            Shape::Box { size } => ConvexPolytope::from_box(*size),
            Shape::Extrusion { polygon, height } => {
                ConvexPolytope::from_extrusion(polygon, *height)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolidPrimitive {
    pub id: String,
    pub shape: Shape,
    pub pose: Pose,
    pub material_id: String,
}

impl SolidPrimitive {
    /// Local polytope placed into the world.
    pub fn world_polytope(&self) -> ConvexPolytope {
        self.shape.polytope().transformed(&self.pose.isometry())
    }

    pub fn validate(&self) -> Result<(), GeomError> {
        let bad = |reason: String| GeomError::InvalidSolid {
            id: self.id.clone(),
            reason,
        };
        match &self.shape {
            Shape::Box { size } => {
                if !(size.x > 0.0 && size.y > 0.0 && size.z > 0.0) {
                    return Err(bad(format!("box dimensions must be positive, got {size:?}")));
                }
            }
            Shape::Extrusion { polygon, height } => {
                if !(*height > 0.0) {
                    return Err(bad("extrusion height must be positive".into()));
                }
                if polygon.len() < 3 {
                    return Err(bad("extrusion polygon needs at least 3 vertices".into()));
                }
                if polygon_signed_area(polygon) <= 0.0 {
                    return Err(bad("extrusion polygon must be CCW with positive area".into()));
                }
                if !polygon_is_convex(polygon) {
                    return Err(bad("extrusion polygon must be convex".into()));
                }
            }
        }
        let q = self.pose.orientation.quaternion();
        if (q.norm() - 1.0).abs() > 1e-9 {
            return Err(bad("orientation quaternion is not normalized".into()));
        }
        Ok(())
    }
}

pub fn polygon_signed_area(polygon: &[[f64; 2]]) -> f64 {
    let mut acc = 0.0;
    for i in 0..polygon.len() {
        let a = polygon[i];
        let b = polygon[(i + 1) % polygon.len()];
        acc += a[0] * b[1] - b[0] * a[1];
    }
    acc / 2.0
}

fn polygon_is_convex(polygon: &[[f64; 2]]) -> bool {
    let n = polygon.len();
    for i in 0..n {
        let a = polygon[i];
        let b = polygon[(i + 1) % n];
        let c = polygon[(i + 2) % n];
        let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
        if cross < -1e-12 {
            return false;
        }
    }
    true
}

/// Rescale a model into meters. Positions and dimensions scale; orientations
/// do not.
pub fn normalize_units(
    model: &[SolidPrimitive],
    source_unit: LengthUnit,
) -> Vec<SolidPrimitive> {
    let k = source_unit.scale_to_m();
    model
        .iter()
        .map(|s| SolidPrimitive {
            id: s.id.clone(),
            shape: s.shape.scaled(k),
            pose: Pose {
                position: s.pose.position * k,
                orientation: s.pose.orientation,
            },
            material_id: s.material_id.clone(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn box_solid(id: &str, size: [f64; 3], pos: [f64; 3]) -> SolidPrimitive {
        SolidPrimitive {
            id: id.into(),
            shape: Shape::Box {
                size: Vec3::new(size[0], size[1], size[2]),
            },
            pose: Pose::translation(Vec3::new(pos[0], pos[1], pos[2])),
            material_id: "concrete".into(),
        }
    }

    #[test]
    fn cm_box_scales_to_meters() {
        let model = vec![box_solid("wall", [300.0, 20.0, 250.0], [100.0, 0.0, 0.0])];
        let out = normalize_units(&model, LengthUnit::Cm);
        match &out[0].shape {
            Shape::Box { size } => {
                assert!((size - Vec3::new(3.0, 0.2, 2.5)).norm() < 1e-12);
            }
            _ => unreachable!(),
        }
        assert!((out[0].pose.position - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn meters_input_is_identity() {
        let model = vec![box_solid("wall", [3.0, 0.2, 2.5], [1.0, 2.0, 0.0])];
        let out = normalize_units(&model, LengthUnit::M);
        assert_eq!(out, model);
    }

    #[test]
    fn unknown_unit_is_rejected_with_tag() {
        let err = LengthUnit::parse("furlong").unwrap_err();
        assert!(err.to_string().contains("furlong"));
    }

    #[test]
    fn scene_volume_scales_uniformly() {
        // volume check through brute-force hull integration on each polytope
        let model = vec![
            box_solid("a", [300.0, 20.0, 250.0], [0.0, 0.0, 0.0]),
            box_solid("b", [100.0, 100.0, 100.0], [400.0, 0.0, 0.0]),
        ];
        let cm_volume: f64 = model.iter().map(|s| s.world_polytope().volume()).sum();
        let out = normalize_units(&model, LengthUnit::Cm);
        let m_volume: f64 = out.iter().map(|s| s.world_polytope().volume()).sum();
        assert!((m_volume - cm_volume * 1e-6).abs() / m_volume < 1e-12);
    }

    #[test]
    fn validation_rejects_degenerate_shapes() {
        let mut s = box_solid("bad", [1.0, 0.0, 1.0], [0.0, 0.0, 0.0]);
        assert!(s.validate().is_err());
        s.shape = Shape::Extrusion {
            polygon: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.2, 0.1]],
            height: 1.0,
        };
        assert!(s.validate().is_err(), "non-convex polygon must fail");
        s.shape = Shape::Extrusion {
            polygon: vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]],
            height: 1.0,
        };
        assert!(s.validate().is_err(), "CW polygon must fail");
    }
}
