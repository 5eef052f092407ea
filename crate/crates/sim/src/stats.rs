//! Damage accounting over a finished frame log.

use std::collections::{BTreeMap, HashMap};

use rubble_geom::fracture::GeometryCollection;
use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::log::SimulationFrame;

/// How far a piece must move from rest, in meters, to count as displaced.
pub const DISPLACEMENT_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MaterialDamage {
    pub total_bonds: u32,
    pub broken_bonds: u32,
}

impl MaterialDamage {
    pub fn fraction(&self) -> f64 {
        if self.total_bonds == 0 {
            0.0
        } else {
            self.broken_bonds as f64 / self.total_bonds as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DamageReport {
    pub frames: u32,
    /// Cumulative broken-bond fraction after each frame.
    pub broken_fraction: Vec<f64>,
    pub final_broken_fraction: f64,
    /// Bond damage keyed by material; a bond joining two materials counts
    /// toward both.
    pub by_material: BTreeMap<String, MaterialDamage>,
    /// Volume fraction of pieces that ended farther than the displacement
    /// threshold from their rest position.
    pub displaced_volume_fraction: f64,
}

/// Fold a frame log into damage statistics. The collection must be the same
/// merged geometry the world was built from, since bond ids in the log are
/// indices into its bond list.
pub fn damage_stats(
    pieces: &GeometryCollection,
    frames: &[SimulationFrame],
) -> Result<DamageReport, SimError> {
    if frames.is_empty() {
        return Err(SimError::EmptyLog);
    }

    let material_of: HashMap<u64, &str> = pieces
        .pieces
        .iter()
        .map(|p| (p.id, p.material_id.as_str()))
        .collect();

    let mut by_material: BTreeMap<String, MaterialDamage> = BTreeMap::new();
    for bond in &pieces.bonds.edges {
        let mut mats: Vec<&str> = Vec::with_capacity(2);
        for piece in [bond.piece_a, bond.piece_b] {
            if let Some(m) = material_of.get(&piece) {
                if !mats.contains(m) {
                    mats.push(m);
                }
            }
        }
        for m in mats {
            by_material.entry(m.to_string()).or_default().total_bonds += 1;
        }
    }

    let total_bonds = pieces.bonds.len();
    let mut broken = 0usize;
    let mut broken_fraction = Vec::with_capacity(frames.len());
    for frame in frames {
        for &bond_id in &frame.broken_bonds {
            broken += 1;
            if let Some(bond) = pieces.bonds.edges.get(bond_id as usize) {
                let mut mats: Vec<&str> = Vec::with_capacity(2);
                for piece in [bond.piece_a, bond.piece_b] {
                    if let Some(m) = material_of.get(&piece) {
                        if !mats.contains(m) {
                            mats.push(m);
                        }
                    }
                }
                for m in mats {
                    by_material.entry(m.to_string()).or_default().broken_bonds += 1;
                }
            }
        }
        broken_fraction.push(if total_bonds == 0 {
            0.0
        } else {
            broken as f64 / total_bonds as f64
        });
    }

    let last = frames.last().expect("nonempty");
    let mut displaced_volume = 0.0;
    let mut total_volume = 0.0;
    for state in &last.bodies {
        let Some(piece) = pieces.piece(state.piece_id) else {
            continue;
        };
        total_volume += piece.volume;
        let rest = piece.rest_pose.position;
        let dx = state.position[0] - rest.x;
        let dy = state.position[1] - rest.y;
        let dz = state.position[2] - rest.z;
        if (dx * dx + dy * dy + dz * dz).sqrt() > DISPLACEMENT_THRESHOLD {
            displaced_volume += piece.volume;
        }
    }

    Ok(DamageReport {
        frames: frames.len() as u32,
        final_broken_fraction: broken_fraction.last().copied().unwrap_or(0.0),
        broken_fraction,
        by_material,
        displaced_volume_fraction: if total_volume > 0.0 {
            displaced_volume / total_volume
        } else {
            0.0
        },
    })
}
