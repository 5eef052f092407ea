//! Volume-distribution weight map: how much building each patch of the
//! foundation carries, and how that volume splits across the anchors.

use rubble_geom::footprint::FootprintPolygon;
use rubble_geom::polytope::ConvexPolytope;
use rubble_geom::solid::SolidPrimitive;
use rubble_geom::Vec3;

use crate::error::AnchorError;
use crate::types::{AnchorPoint, WeightMap};

/// Build the column-volume grid over the footprint bounding box and derive
/// normalized anchor weights by summing cells within `radius` of each anchor.
pub fn build_weight_map(
    solids: &[SolidPrimitive],
    footprint: &FootprintPolygon,
    cell: f64,
    anchors: &[AnchorPoint],
    radius: f64,
) -> Result<WeightMap, AnchorError> {
    if cell <= 0.0 {
        return Err(AnchorError::NonPositiveParameter("cell", cell));
    }
    if radius <= 0.0 {
        return Err(AnchorError::NonPositiveParameter("radius", radius));
    }
    if footprint.vertices.len() < 3 {
        return Err(AnchorError::DegenerateFootprint(footprint.vertices.len()));
    }

    let (mut min, mut max) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for v in &footprint.vertices {
        for k in 0..2 {
            min[k] = min[k].min(v[k]);
            max[k] = max[k].max(v[k]);
        }
    }
    let nx = (((max[0] - min[0]) / cell).ceil() as usize).max(1);
    let ny = (((max[1] - min[1]) / cell).ceil() as usize).max(1);

    let polytopes: Vec<ConvexPolytope> = solids.iter().map(|s| s.world_polytope()).collect();

    let mut cells = vec![0.0; nx * ny];
    for iy in 0..ny {
        for ix in 0..nx {
            let x0 = min[0] + ix as f64 * cell;
            let y0 = min[1] + iy as f64 * cell;
            let mut volume = 0.0;
            for p in &polytopes {
                if let Some(clipped) = clip_column(p, x0, x0 + cell, y0, y0 + cell) {
                    volume += clipped.volume();
                }
            }
            cells[iy * nx + ix] = volume;
        }
    }

    let total: f64 = cells.iter().sum();
    if total <= 0.0 {
        return Err(AnchorError::ZeroVolume);
    }

    let mut weights = vec![0.0; anchors.len()];
    for iy in 0..ny {
        for ix in 0..nx {
            let v = cells[iy * nx + ix];
            if v == 0.0 {
                continue;
            }
            let cx = min[0] + (ix as f64 + 0.5) * cell;
            let cy = min[1] + (iy as f64 + 0.5) * cell;
            for (w, anchor) in weights.iter_mut().zip(anchors) {
                let dx = cx - anchor.position[0];
                let dy = cy - anchor.position[1];
                if dx * dx + dy * dy <= radius * radius {
                    *w += v;
                }
            }
        }
    }

    if !anchors.is_empty() {
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(AnchorError::NoVolumeNearAnchors { radius });
        }
        for w in &mut weights {
            *w /= sum;
        }
    }

    Ok(WeightMap {
        origin: min,
        cell,
        nx,
        ny,
        cells,
        weights,
    })
}

/// Intersect a polytope with the infinite vertical column over one cell.
fn clip_column(
    p: &ConvexPolytope,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
) -> Option<ConvexPolytope> {
    p.clip_halfspace(Vec3::new(1.0, 0.0, 0.0), x1)
        .and_then(|p| p.clip_halfspace(Vec3::new(-1.0, 0.0, 0.0), -x0))
        .and_then(|p| p.clip_halfspace(Vec3::new(0.0, 1.0, 0.0), y1))
        .and_then(|p| p.clip_halfspace(Vec3::new(0.0, -1.0, 0.0), -y0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::AnchorSource;
    use rubble_geom::solid::{Pose, Shape};
    use rubble_geom::Vec3;

    fn boxed(id: &str, size: [f64; 3], corner: [f64; 3]) -> SolidPrimitive {
        SolidPrimitive {
            id: id.to_string(),
            shape: Shape::Box {
                size: Vec3::new(size[0], size[1], size[2]),
            },
            pose: Pose::translation(Vec3::new(corner[0], corner[1], corner[2])),
            material_id: "concrete".to_string(),
        }
    }

    fn corner_anchors(w: f64, h: f64) -> Vec<AnchorPoint> {
        [[0.0, 0.0], [w, 0.0], [w, h], [0.0, h]]
            .into_iter()
            .map(|position| AnchorPoint {
                position,
                source: AnchorSource::Corner,
            })
            .collect()
    }

    fn rect_footprint(w: f64, h: f64) -> FootprintPolygon {
        FootprintPolygon {
            vertices: vec![[0.0, 0.0], [w, 0.0], [w, h], [0.0, h]],
        }
    }

    #[test]
    fn uniform_box_gives_equal_quarter_weights() {
        let solids = [boxed("slab", [4.0, 3.0, 2.0], [0.0, 0.0, 0.0])];
        let map = build_weight_map(
            &solids,
            &rect_footprint(4.0, 3.0),
            0.25,
            &corner_anchors(4.0, 3.0),
            1.5,
        )
        .unwrap();
        assert_eq!(map.weights.len(), 4);
        for &w in &map.weights {
            assert!((w - 0.25).abs() < 1e-9, "weight {w}");
        }
        assert!((map.total_volume() - 24.0).abs() < 1e-9);
    }

    #[test]
    fn single_anchor_takes_weight_one() {
        let solids = [boxed("slab", [4.0, 3.0, 2.0], [0.0, 0.0, 0.0])];
        let anchors = vec![AnchorPoint {
            position: [0.0, 0.0],
            source: AnchorSource::Corner,
        }];
        let map =
            build_weight_map(&solids, &rect_footprint(4.0, 3.0), 0.25, &anchors, 1.5).unwrap();
        assert_eq!(map.weights, vec![1.0]);
    }

    #[test]
    fn tower_tilts_weight_east_and_matches_voxel_oracle() {
        // slab spans the footprint, tower sits on the east half
        let solids = [
            boxed("slab", [4.0, 3.0, 0.2], [0.0, 0.0, 0.0]),
            boxed("tower", [2.0, 3.0, 3.0], [2.0, 0.0, 0.2]),
        ];
        let anchors = corner_anchors(4.0, 3.0);
        let map =
            build_weight_map(&solids, &rect_footprint(4.0, 3.0), 0.25, &anchors, 1.5).unwrap();

        let west: f64 = map.weights[0] + map.weights[3];
        let east: f64 = map.weights[1] + map.weights[2];
        assert!(east > west, "east {east} <= west {west}");

        // independent oracle: 1 cm columns with analytic z-extents for the two boxes
        let mut oracle = vec![0.0f64; anchors.len()];
        let step = 0.01;
        for iy in 0..300 {
            for ix in 0..400 {
                let (cx, cy) = ((ix as f64 + 0.5) * step, (iy as f64 + 0.5) * step);
                let mut dz = 0.2;
                if cx >= 2.0 {
                    dz += 3.0;
                }
                let v = dz * step * step;
                for (w, a) in oracle.iter_mut().zip(&anchors) {
                    let (dx, dy) = (cx - a.position[0], cy - a.position[1]);
                    if dx * dx + dy * dy <= 1.5 * 1.5 {
                        *w += v;
                    }
                }
            }
        }
        let sum: f64 = oracle.iter().sum();
        for w in &mut oracle {
            *w /= sum;
        }
        assert!(oracle[1] + oracle[2] > oracle[0] + oracle[3]);
        for (i, (&got, &want)) in map.weights.iter().zip(&oracle).enumerate() {
            assert!(
                (got - want).abs() < 0.02,
                "anchor {i}: weight {got} vs oracle {want}"
            );
        }
    }

    #[test]
    fn column_volumes_are_exact_for_a_rotated_box() {
        let angle: f64 = 30f64.to_radians();
        let solid = SolidPrimitive {
            id: "slab".into(),
            shape: Shape::Box {
                size: Vec3::new(2.0, 1.0, 0.5),
            },
            pose: Pose {
                position: Vec3::new(1.5, 0.5, 0.0),
                orientation: rubble_geom::Quat::from_axis_angle(&Vec3::z_axis(), angle),
            },
            material_id: "concrete".into(),
        };
        let map = build_weight_map(
            &[solid],
            &rect_footprint(4.0, 3.0),
            0.25,
            &corner_anchors(4.0, 3.0),
            2.5,
        )
        .unwrap();
        assert!((map.total_volume() - 1.0).abs() < 1e-9);
        assert!(map.cells.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn empty_scene_is_zero_volume_error() {
        let err = build_weight_map(
            &[],
            &rect_footprint(4.0, 3.0),
            0.25,
            &corner_anchors(4.0, 3.0),
            1.5,
        )
        .unwrap_err();
        assert!(matches!(err, AnchorError::ZeroVolume));
    }

    #[test]
    fn anchors_far_from_all_volume_error() {
        let solids = [boxed("slab", [1.0, 1.0, 1.0], [0.0, 0.0, 0.0])];
        let far = vec![AnchorPoint {
            position: [40.0, 40.0],
            source: AnchorSource::Corner,
        }];
        let fp = FootprintPolygon {
            vertices: vec![[0.0, 0.0], [41.0, 0.0], [41.0, 41.0], [0.0, 41.0]],
        };
        let err = build_weight_map(&solids, &fp, 0.25, &far, 0.5).unwrap_err();
        assert!(matches!(err, AnchorError::NoVolumeNearAnchors { .. }));
    }

    #[test]
    fn cell_sums_track_total_volume_within_one_percent() {
        let solids = [
            boxed("a", [3.0, 2.0, 1.0], [0.0, 0.0, 0.0]),
            boxed("b", [1.0, 1.0, 4.0], [3.0, 2.0, 0.0]),
        ];
        let fp = rect_footprint(4.0, 3.0);
        let map =
            build_weight_map(&solids, &fp, 0.25, &corner_anchors(4.0, 3.0), 1.5).unwrap();
        let expected = 3.0 * 2.0 * 1.0 + 1.0 * 1.0 * 4.0;
        assert!((map.total_volume() - expected).abs() / expected < 0.01);
    }
}
