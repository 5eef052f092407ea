//! Wavefront OBJ export of a fracture collection, one object per piece.

use std::fmt::Write as _;

use crate::fracture::GeometryCollection;
use crate::solid::Pose;

/// Serialize pieces as OBJ at the given poses. Pass `None` for rest poses.
/// Vertex indices are global and 1-based, as OBJ requires.
pub fn collection_to_obj(
    collection: &GeometryCollection,
    poses: Option<&[Pose]>,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {} pieces", collection.pieces.len());
    let mut base = 1usize;
    for (i, piece) in collection.pieces.iter().enumerate() {
        let pose = poses.map_or(piece.rest_pose, |p| p[i]);
        let world = piece.polytope.transformed(&pose.isometry());
        let _ = writeln!(out, "o piece_{}", piece.id);
        for v in world.vertices() {
            let _ = writeln!(out, "v {:.9} {:.9} {:.9}", v.x, v.y, v.z);
        }
        for face in world.faces() {
            let _ = write!(out, "f");
            for &vi in face {
                let _ = write!(out, " {}", base + vi);
            }
            let _ = writeln!(out);
        }
        base += world.vertices().len();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracture::fracture;
    use crate::material::MaterialTable;
    use crate::solid::{Shape, SolidPrimitive};
    use crate::Vec3;

    #[test]
    fn export_counts_match_geometry() {
        let solid = SolidPrimitive {
            id: "cube".into(),
            shape: Shape::Box {
                size: Vec3::repeat(1.0),
            },
            pose: Pose::identity(),
            material_id: "concrete".into(),
        };
        let mut mat = MaterialTable::builtin().get("concrete").unwrap().clone();
        mat.fracture_cell_target = 0.125;
        mat.fracture_style = crate::material::FractureStyle::Grid;
        let col = fracture(&solid, &mat, 1).unwrap();
        let obj = collection_to_obj(&col, None);

        let objects = obj.lines().filter(|l| l.starts_with("o ")).count();
        let verts = obj.lines().filter(|l| l.starts_with("v ")).count();
        let faces = obj.lines().filter(|l| l.starts_with("f ")).count();
        assert_eq!(objects, 8);
        assert_eq!(verts, 8 * 8);
        assert_eq!(faces, 8 * 6);

        // face indices must all point at declared vertices
        for line in obj.lines().filter(|l| l.starts_with("f ")) {
            for tok in line.split_whitespace().skip(1) {
                let idx: usize = tok.parse().unwrap();
                assert!(idx >= 1 && idx <= verts);
            }
        }
    }

    #[test]
    fn rest_pose_export_reconstructs_world_positions() {
        let solid = SolidPrimitive {
            id: "cube".into(),
            shape: Shape::Box {
                size: Vec3::repeat(2.0),
            },
            pose: Pose::translation(Vec3::new(5.0, 0.0, 0.0)),
            material_id: "concrete".into(),
        };
        let mut mat = MaterialTable::builtin().get("concrete").unwrap().clone();
        mat.fracture_cell_target = 100.0;
        let col = fracture(&solid, &mat, 1).unwrap();
        let obj = collection_to_obj(&col, None);
        let xs: Vec<f64> = obj
            .lines()
            .filter(|l| l.starts_with("v "))
            .map(|l| l.split_whitespace().nth(1).unwrap().parse().unwrap())
            .collect();
        let min = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!((min - 5.0).abs() < 1e-6);
        assert!((max - 7.0).abs() < 1e-6);
    }
}
