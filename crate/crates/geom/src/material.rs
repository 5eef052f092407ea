//! Material definitions driving pre-fracture style and bond strength.

use serde::{Deserialize, Serialize};

use crate::error::GeomError;

/// Cutting axis for grain-aligned fracture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// How a solid is carved into pieces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FractureStyle {
    /// Seeded 3D Voronoi cells clipped to the solid.
    Voronoi,
    /// Axis-aligned grid cuts, brick-coursing style.
    Grid,
    /// Parallel cuts perpendicular to one axis, for grain materials.
    PlanarGrain(Axis),
}

impl FractureStyle {
    pub fn parse(s: &str) -> Result<Self, GeomError> {
        match s {
            "voronoi" => Ok(Self::Voronoi),
            "grid" => Ok(Self::Grid),
            "planar_grain" | "planar_grain:x" => Ok(Self::PlanarGrain(Axis::X)),
            "planar_grain:y" => Ok(Self::PlanarGrain(Axis::Y)),
            "planar_grain:z" => Ok(Self::PlanarGrain(Axis::Z)),
            other => Err(GeomError::InvalidMaterial {
                name: String::new(),
                reason: format!("unknown fracture style {other:?}"),
            }),
        }
    }

    pub fn as_str(&self) -> String {
        match self {
            Self::Voronoi => "voronoi".into(),
            Self::Grid => "grid".into(),
            Self::PlanarGrain(Axis::X) => "planar_grain:x".into(),
            Self::PlanarGrain(Axis::Y) => "planar_grain:y".into(),
            Self::PlanarGrain(Axis::Z) => "planar_grain:z".into(),
        }
    }
}

impl Serialize for FractureStyle {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.as_str())
    }
}

impl<'de> Deserialize<'de> for FractureStyle {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        FractureStyle::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Physical and fracture parameters of one material.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialSpec {
    pub name: String,
    /// kg/m^3
    pub density: f64,
    /// Break impulse per contact area, N*s/m^2.
    pub bond_strength: f64,
    /// Target piece volume, m^3.
    pub fracture_cell_target: f64,
    pub fracture_style: FractureStyle,
}

/// Reference bond strength used to normalize material factors; equals the
/// concrete default so concrete maps to a factor of 1.
pub const REFERENCE_BOND_STRENGTH: f64 = 4.0e5;

impl MaterialSpec {
    /// Built-in defaults for the four stock materials. Strengths and cell
    /// targets are engine calibration values, not measured constants.
    pub fn builtin(name: &str) -> Option<MaterialSpec> {
        let spec = match name {
            "concrete" => MaterialSpec {
                name: "concrete".into(),
                density: 2400.0,
                bond_strength: 4.0e5,
                fracture_cell_target: 0.05,
                fracture_style: FractureStyle::Voronoi,
            },
            "brick" => MaterialSpec {
                name: "brick".into(),
                density: 1800.0,
                bond_strength: 1.0e5,
                fracture_cell_target: 0.01,
                fracture_style: FractureStyle::Grid,
            },
            "stone" => MaterialSpec {
                name: "stone".into(),
                density: 2600.0,
                bond_strength: 2.5e5,
                fracture_cell_target: 0.02,
                fracture_style: FractureStyle::Voronoi,
            },
            "wood" => MaterialSpec {
                name: "wood".into(),
                density: 600.0,
                bond_strength: 6.0e4,
                fracture_cell_target: 0.01,
                fracture_style: FractureStyle::PlanarGrain(Axis::X),
            },
            _ => return None,
        };
        Some(spec)
    }

    /// Dimensionless strength relative to concrete, used to scale anchor
    /// break thresholds.
    pub fn material_factor(&self) -> f64 {
        self.bond_strength / REFERENCE_BOND_STRENGTH
    }

    pub fn validate(&self) -> Result<(), GeomError> {
        let bad = |reason: &str| GeomError::InvalidMaterial {
            name: self.name.clone(),
            reason: reason.into(),
        };
        if !(self.density > 0.0) {
            return Err(bad("density must be > 0"));
        }
        if !(self.bond_strength > 0.0) {
            return Err(bad("bond_strength must be > 0"));
        }
        if !(self.fracture_cell_target > 0.0) {
            return Err(bad("fracture_cell_target must be > 0"));
        }
        Ok(())
    }
}

/// Material lookup by id for a loaded scene.
#[derive(Debug, Clone, Default)]
pub struct MaterialTable {
    entries: std::collections::BTreeMap<String, MaterialSpec>,
}

impl MaterialTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Table preloaded with the built-in materials.
    pub fn builtin() -> Self {
        let mut table = Self::new();
        for name in ["concrete", "brick", "stone", "wood"] {
            table.insert(MaterialSpec::builtin(name).expect("built-in"));
        }
        table
    }

    pub fn insert(&mut self, spec: MaterialSpec) {
        self.entries.insert(spec.name.clone(), spec);
    }

    pub fn get(&self, id: &str) -> Option<&MaterialSpec> {
        self.entries.get(id)
    }

    pub fn require(&self, id: &str) -> Result<&MaterialSpec, GeomError> {
        self.entries
            .get(id)
            .ok_or_else(|| GeomError::UnknownMaterial(id.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &MaterialSpec)> {
        self.entries.iter()
    }
}
