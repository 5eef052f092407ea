//! Model files on disk.
//!
//! A model file is a single JSON document:
//!
//! ```json
//! {
//!   "version": 1,
//!   "unit": "cm",
//!   "materials": {
//!     "soft_brick": { "base": "brick", "bond_strength": 5.0e4 }
//!   },
//!   "solids": [
//!     { "id": "slab",
//!       "shape": { "type": "box", "size": [300.0, 250.0, 20.0] },
//!       "position": [0.0, 0.0, 0.0],
//!       "material": "concrete" },
//!     { "id": "pier",
//!       "shape": { "type": "extrusion",
//!                  "polygon": [[0.0, 0.0], [40.0, 0.0], [40.0, 40.0], [0.0, 40.0]],
//!                  "height": 280.0 },
//!       "position": [20.0, 20.0, 20.0],
//!       "yaw_deg": 15.0,
//!       "material": "concrete" }
//!   ]
//! }
//! ```
//!
//! Lengths are in the declared unit (`"m"` or `"cm"`); loading converts
//! everything to meters. `materials` entries extend a built-in material
//! (via `base`, or their own name if it is built in) or define a new one by
//! giving every field. Unknown keys anywhere are hard errors.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::GeomError;
use crate::fracture::GeometryCollection;
use crate::material::{FractureStyle, MaterialSpec, MaterialTable};
use crate::solid::{normalize_units, LengthUnit, Pose, Shape, SolidPrimitive};
use crate::{Quat, Vec3};

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDoc {
    pub version: u32,
    pub unit: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub materials: BTreeMap<String, MaterialDoc>,
    pub solids: Vec<SolidDoc>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bond_strength: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fracture_cell_target: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fracture_style: Option<FractureStyle>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolidDoc {
    pub id: String,
    pub shape: ShapeDoc,
    #[serde(default)]
    pub position: [f64; 3],
    /// Rotation about the vertical axis, degrees. Mutually exclusive with
    /// `orientation`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub yaw_deg: Option<f64>,
    /// Full orientation quaternion as [w, x, y, z].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<[f64; 4]>,
    pub material: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeDoc {
    Box { size: [f64; 3] },
    Extrusion { polygon: Vec<[f64; 2]>, height: f64 },
}

/// A parsed model: solids in meters plus the resolved material table.
#[derive(Debug, Clone)]
pub struct Model {
    pub solids: Vec<SolidPrimitive>,
    pub materials: MaterialTable,
}

pub fn load_model(path: &Path) -> Result<Model, GeomError> {
    let text = std::fs::read_to_string(path)?;
    parse_model(&text)
}

pub fn parse_model(text: &str) -> Result<Model, GeomError> {
    let doc: ModelDoc =
        serde_json::from_str(text).map_err(|e| GeomError::Scene(e.to_string()))?;
    if doc.version != MODEL_VERSION {
        return Err(GeomError::Scene(format!(
            "unsupported model version {} (expected {MODEL_VERSION})",
            doc.version
        )));
    }
    let unit = LengthUnit::parse(&doc.unit)?;

    let mut materials = MaterialTable::builtin();
    for (name, mdoc) in &doc.materials {
        let spec = resolve_material(name, mdoc, &materials)?;
        materials.insert(spec);
    }

    let mut seen = std::collections::BTreeSet::new();
    let mut solids = Vec::with_capacity(doc.solids.len());
    for sdoc in &doc.solids {
        if !seen.insert(sdoc.id.clone()) {
            return Err(GeomError::Scene(format!("duplicate solid id '{}'", sdoc.id)));
        }
        if materials.get(&sdoc.material).is_none() {
            return Err(GeomError::UnknownMaterial(sdoc.material.clone()));
        }
        solids.push(solid_from_doc(sdoc)?);
    }
    let solids = normalize_units(&solids, unit);
    for s in &solids {
        s.validate()?;
    }
    Ok(Model { solids, materials })
}

fn resolve_material(
    name: &str,
    doc: &MaterialDoc,
    table: &MaterialTable,
) -> Result<MaterialSpec, GeomError> {
    let base = doc.base.as_deref().unwrap_or(name);
    let spec = match table.get(base) {
        Some(b) => MaterialSpec {
            name: name.to_string(),
            density: doc.density.unwrap_or(b.density),
            bond_strength: doc.bond_strength.unwrap_or(b.bond_strength),
            fracture_cell_target: doc.fracture_cell_target.unwrap_or(b.fracture_cell_target),
            fracture_style: doc.fracture_style.unwrap_or(b.fracture_style),
        },
        None => {
            if doc.base.is_some() {
                return Err(GeomError::UnknownMaterial(base.to_string()));
            }
            let missing = |field: &str| {
                GeomError::InvalidMaterial {
                    name: name.to_string(),
                    reason: format!("new material must declare {field}"),
                }
            };
            MaterialSpec {
                name: name.to_string(),
                density: doc.density.ok_or_else(|| missing("density"))?,
                bond_strength: doc.bond_strength.ok_or_else(|| missing("bond_strength"))?,
                fracture_cell_target: doc
                    .fracture_cell_target
                    .ok_or_else(|| missing("fracture_cell_target"))?,
                fracture_style: doc.fracture_style.ok_or_else(|| missing("fracture_style"))?,
            }
        }
    };
    spec.validate()?;
    Ok(spec)
}

fn solid_from_doc(doc: &SolidDoc) -> Result<SolidPrimitive, GeomError> {
    let orientation = match (doc.yaw_deg, doc.orientation) {
        (Some(_), Some(_)) => {
            return Err(GeomError::Scene(format!(
                "solid '{}' sets both yaw_deg and orientation",
                doc.id
            )))
        }
        (Some(yaw), None) => Quat::from_axis_angle(&Vec3::z_axis(), yaw.to_radians()),
        (None, Some([w, x, y, z])) => {
            let q = nalgebra::Quaternion::new(w, x, y, z);
            if (q.norm() - 1.0).abs() > 1e-9 {
                return Err(GeomError::Scene(format!(
                    "solid '{}' orientation is not a unit quaternion (norm {})",
                    doc.id,
                    q.norm()
                )));
            }
            Quat::from_quaternion(q)
        }
        (None, None) => Quat::identity(),
    };
    let shape = match &doc.shape {
        ShapeDoc::Box { size } => Shape::Box {
            size: Vec3::new(size[0], size[1], size[2]),
        },
        ShapeDoc::Extrusion { polygon, height } => Shape::Extrusion {
            polygon: polygon.clone(),
            height: *height,
        },
    };
    Ok(SolidPrimitive {
        id: doc.id.clone(),
        shape,
        pose: Pose {
            position: Vec3::new(doc.position[0], doc.position[1], doc.position[2]),
            orientation,
        },
        material_id: doc.material.clone(),
    })
}

/// Fracture every solid of a model and glue the result into one bonded
/// collection. Each solid fractures under its own seed derived from the
/// scene seed and the solid id, so adding a solid never reshuffles others.
pub fn fracture_model(
    model: &Model,
    seed: u64,
    gap_tolerance: f64,
) -> Result<GeometryCollection, GeomError> {
    let mut parts = Vec::with_capacity(model.solids.len());
    for solid in &model.solids {
        let material = model.materials.require(&solid.material_id)?;
        let solid_seed = crate::stable_hash(&[&seed.to_le_bytes(), solid.id.as_bytes()]);
        parts.push(crate::fracture::fracture(solid, material, solid_seed)?);
    }
    let mut merged = GeometryCollection::merge(parts, seed);
    merged.bonds = crate::bond::build_bond_graph(&merged, &model.materials, gap_tolerance);
    Ok(merged)
}

/// Wrapper for the native fracture-collection file, JSON with a version tag.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CollectionDoc {
    version: u32,
    collection: GeometryCollection,
}

pub fn save_collection(path: &Path, collection: &GeometryCollection) -> Result<(), GeomError> {
    let doc = CollectionDoc {
        version: MODEL_VERSION,
        collection: collection.clone(),
    };
    let text =
        serde_json::to_string_pretty(&doc).map_err(|e| GeomError::Scene(e.to_string()))?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_collection(path: &Path) -> Result<GeometryCollection, GeomError> {
    let text = std::fs::read_to_string(path)?;
    let doc: CollectionDoc =
        serde_json::from_str(&text).map_err(|e| GeomError::Scene(e.to_string()))?;
    if doc.version != MODEL_VERSION {
        return Err(GeomError::Scene(format!(
            "unsupported collection version {}",
            doc.version
        )));
    }
    Ok(doc.collection)
}
