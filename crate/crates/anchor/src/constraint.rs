//! Turning placed anchors and weights into breakable terrain bindings.

use rubble_geom::fracture::GeometryCollection;
use rubble_geom::material::MaterialSpec;

use crate::error::AnchorError;
use crate::types::{AnchorConstraint, AnchorPoint};

/// Moment arm converting a linear impulse budget into an angular one.
pub const LEVER_ARM: f64 = 0.5;

/// How far an anchor may sit from the nearest grounded piece.
pub const ATTACH_RADIUS: f64 = 0.5;

/// Elastic give of a binding, m/N.
pub const COMPLIANCE: f64 = 1e-7;

/// Derive one constraint per anchor: break thresholds proportional to
/// `scale * weight * material_factor`, attached to the nearest grounded
/// piece of the collection.
pub fn make_constraints(
    anchors: &[AnchorPoint],
    weights: &[f64],
    collection: &GeometryCollection,
    material: &MaterialSpec,
    scale: f64,
    ground_tolerance: f64,
) -> Result<Vec<AnchorConstraint>, AnchorError> {
    if anchors.len() != weights.len() {
        return Err(AnchorError::WeightCountMismatch {
            anchors: anchors.len(),
            weights: weights.len(),
        });
    }
    if scale <= 0.0 {
        return Err(AnchorError::NonPositiveParameter("scale", scale));
    }

    // grounded pieces with their world bounds, cheapest distance proxy
    let grounded: Vec<(u64, f64, (rubble_geom::Vec3, rubble_geom::Vec3))> = collection
        .pieces
        .iter()
        .filter_map(|p| {
            let (min, max) = p.world_polytope().aabb();
            (min.z.abs() <= ground_tolerance).then_some((p.id, min.z, (min, max)))
        })
        .collect();

    let factor = material.material_factor();
    anchors
        .iter()
        .zip(weights)
        .enumerate()
        .map(|(anchor_id, (anchor, &weight))| {
            let [x, y] = anchor.position;
            let best = grounded
                .iter()
                .map(|&(id, min_z, (ref lo, ref hi))| {
                    let dx = (lo.x - x).max(0.0).max(x - hi.x);
                    let dy = (lo.y - y).max(0.0).max(y - hi.y);
                    let dz = lo.z.max(0.0);
                    ((dx * dx + dy * dy + dz * dz).sqrt(), min_z, id)
                })
                .min_by(|a, b| {
                    a.0.total_cmp(&b.0)
                        .then(a.1.total_cmp(&b.1))
                        .then(a.2.cmp(&b.2))
                });
            let (distance, _, piece_id) = match best {
                Some(b) if b.0 <= ATTACH_RADIUS => b,
                _ => {
                    return Err(AnchorError::AnchorOffFoundation {
                        anchor_id,
                        x,
                        y,
                        radius: ATTACH_RADIUS,
                    })
                }
            };
            let _ = distance;
            let linear = scale * weight * factor;
            Ok(AnchorConstraint {
                anchor_id,
                piece_id,
                position: [x, y, 0.0],
                linear_break_threshold: linear,
                angular_break_threshold: linear * LEVER_ARM,
                compliance: COMPLIANCE,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::AnchorSource;
    use rubble_geom::fracture::fracture;
    use rubble_geom::material::{FractureStyle, MaterialTable};
    use rubble_geom::solid::{Pose, Shape, SolidPrimitive};
    use rubble_geom::Vec3;

    fn two_piece_bar() -> (GeometryCollection, MaterialSpec) {
        let solid = SolidPrimitive {
            id: "bar".into(),
            shape: Shape::Box {
                size: Vec3::new(2.0, 1.0, 1.0),
            },
            pose: Pose::translation(Vec3::new(0.0, 0.0, 0.0)),
            material_id: "test".into(),
        };
        let material = MaterialSpec {
            name: "test".into(),
            density: 2400.0,
            bond_strength: 4.0e5,
            fracture_cell_target: 1.0,
            fracture_style: FractureStyle::Grid,
        };
        (fracture(&solid, &material, 7).unwrap(), material)
    }

    fn anchor_at(x: f64, y: f64) -> AnchorPoint {
        AnchorPoint {
            position: [x, y],
            source: AnchorSource::Corner,
        }
    }

    #[test]
    fn equal_weights_give_equal_thresholds() {
        let (collection, material) = two_piece_bar();
        let anchors = vec![anchor_at(0.0, 0.0), anchor_at(2.0, 1.0)];
        let out =
            make_constraints(&anchors, &[0.5, 0.5], &collection, &material, 1e6, 0.01).unwrap();
        assert_eq!(out.len(), 2);
        for c in &out {
            assert!((c.linear_break_threshold - 5e5).abs() < 1e-6);
            assert!((c.angular_break_threshold - 2.5e5).abs() < 1e-6);
            assert!(c.compliance > 0.0);
        }
    }

    #[test]
    fn quarter_weights_match_the_proportionality_rule() {
        let (collection, material) = two_piece_bar();
        let anchors = vec![
            anchor_at(0.0, 0.0),
            anchor_at(2.0, 0.0),
            anchor_at(2.0, 1.0),
            anchor_at(0.0, 1.0),
        ];
        let out = make_constraints(
            &anchors,
            &[0.25; 4],
            &collection,
            &material,
            1e6,
            0.01,
        )
        .unwrap();
        for c in &out {
            // concrete-strength material, factor 1
            assert!((c.linear_break_threshold - 2.5e5).abs() < 1e-6);
        }
    }

    #[test]
    fn doubling_scale_doubles_every_threshold() {
        let (collection, material) = two_piece_bar();
        let anchors = vec![anchor_at(0.0, 0.0), anchor_at(2.0, 1.0)];
        let weights = [0.7, 0.3];
        let a =
            make_constraints(&anchors, &weights, &collection, &material, 1e6, 0.01).unwrap();
        let b =
            make_constraints(&anchors, &weights, &collection, &material, 2e6, 0.01).unwrap();
        for (ca, cb) in a.iter().zip(&b) {
            assert_eq!(cb.linear_break_threshold, 2.0 * ca.linear_break_threshold);
            assert_eq!(cb.angular_break_threshold, 2.0 * ca.angular_break_threshold);
        }
    }

    #[test]
    fn threshold_order_follows_weight_order() {
        let (collection, material) = two_piece_bar();
        let anchors = vec![
            anchor_at(0.0, 0.0),
            anchor_at(2.0, 0.0),
            anchor_at(2.0, 1.0),
            anchor_at(0.0, 1.0),
        ];
        let weights = [0.4, 0.1, 0.3, 0.2];
        let out =
            make_constraints(&anchors, &weights, &collection, &material, 1e6, 0.01).unwrap();
        let mut by_threshold: Vec<usize> = (0..4).collect();
        by_threshold.sort_by(|&a, &b| {
            out[a]
                .linear_break_threshold
                .total_cmp(&out[b].linear_break_threshold)
        });
        let mut by_weight: Vec<usize> = (0..4).collect();
        by_weight.sort_by(|&a, &b| weights[a].total_cmp(&weights[b]));
        assert_eq!(by_threshold, by_weight);
    }

    #[test]
    fn weaker_material_scales_thresholds_down() {
        let (collection, _) = two_piece_bar();
        let brick = MaterialTable::builtin().require("brick").unwrap().clone();
        let anchors = vec![anchor_at(0.0, 0.0)];
        let out =
            make_constraints(&anchors, &[1.0], &collection, &brick, 1e6, 0.01).unwrap();
        // brick bond strength is a quarter of the concrete reference
        assert!((out[0].linear_break_threshold - 2.5e5).abs() < 1e-6);
    }

    #[test]
    fn anchors_attach_to_their_nearest_piece() {
        let (collection, material) = two_piece_bar();
        // grid fracture splits the bar at x = 1
        let anchors = vec![anchor_at(0.1, 0.1), anchor_at(1.9, 0.9)];
        let out =
            make_constraints(&anchors, &[0.5, 0.5], &collection, &material, 1e6, 0.01).unwrap();
        assert_ne!(out[0].piece_id, out[1].piece_id);
        let piece = |id: u64| collection.piece(id).unwrap();
        assert!(piece(out[0].piece_id).rest_pose.position.x < 1.0);
        assert!(piece(out[1].piece_id).rest_pose.position.x > 1.0);
    }

    #[test]
    fn far_anchor_is_off_foundation() {
        let (collection, material) = two_piece_bar();
        let anchors = vec![anchor_at(10.0, 10.0)];
        let err = make_constraints(&anchors, &[1.0], &collection, &material, 1e6, 0.01)
            .unwrap_err();
        assert!(err.to_string().contains("anchor off foundation"), "{err}");
    }

    #[test]
    fn floating_pieces_are_not_attachment_targets() {
        let solid = SolidPrimitive {
            id: "hover".into(),
            shape: Shape::Box {
                size: Vec3::new(1.0, 1.0, 1.0),
            },
            pose: Pose::translation(Vec3::new(0.0, 0.0, 2.0)),
            material_id: "test".into(),
        };
        let material = MaterialSpec {
            name: "test".into(),
            density: 2400.0,
            bond_strength: 4.0e5,
            fracture_cell_target: 10.0,
            fracture_style: FractureStyle::Grid,
        };
        let collection = fracture(&solid, &material, 1).unwrap();
        let err = make_constraints(
            &[anchor_at(0.5, 0.5)],
            &[1.0],
            &collection,
            &material,
            1e6,
            0.01,
        )
        .unwrap_err();
        assert!(matches!(err, AnchorError::AnchorOffFoundation { .. }));
    }

    #[test]
    fn weight_count_mismatch_is_rejected() {
        let (collection, material) = two_piece_bar();
        let err = make_constraints(
            &[anchor_at(0.0, 0.0)],
            &[0.5, 0.5],
            &collection,
            &material,
            1e6,
            0.01,
        )
        .unwrap_err();
        assert!(matches!(err, AnchorError::WeightCountMismatch { .. }));
    }
}
