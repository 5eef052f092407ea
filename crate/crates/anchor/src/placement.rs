//! Foundation analysis and anchor placement along the footprint boundary.

use rubble_geom::footprint::FootprintPolygon;

use crate::error::AnchorError;
use crate::types::{AnchorPoint, AnchorSource};

/// Candidates may sit this far off the boundary before placement rejects them.
const ON_BOUNDARY_TOLERANCE: f64 = 1e-3;

/// Find boundary vertices whose interior angle deviates from a straight
/// 180° pass-through by more than `angle_threshold_deg`. Convex corners and
/// reflex inflections both qualify; collinear vertices never do.
pub fn analyze_foundation(
    footprint: &FootprintPolygon,
    angle_threshold_deg: f64,
) -> Result<Vec<AnchorPoint>, AnchorError> {
    if footprint.vertices.len() < 3 {
        return Err(AnchorError::DegenerateFootprint(footprint.vertices.len()));
    }
    let threshold = angle_threshold_deg.to_radians();
    let mut out = Vec::new();
    for (prev, v, next) in footprint.corners() {
        let a = [v[0] - prev[0], v[1] - prev[1]];
        let b = [next[0] - v[0], next[1] - v[1]];
        let cross = a[0] * b[1] - a[1] * b[0];
        let dot = a[0] * b[0] + a[1] * b[1];
        let turn = cross.atan2(dot);
        if turn.abs() > threshold {
            out.push(AnchorPoint {
                position: v,
                source: if turn > 0.0 {
                    AnchorSource::Corner
                } else {
                    AnchorSource::Inflection
                },
            });
        }
    }
    Ok(out)
}

/// Walk the boundary from the first candidate, keeping candidates at least
/// `d_min` of boundary ahead of the last kept anchor, then insert evenly
/// spaced infill anchors into any remaining span longer than `max_gap`.
/// A boundary shorter than `d_min` collapses to the first candidate alone.
pub fn place_anchors(
    candidates: &[AnchorPoint],
    footprint: &FootprintPolygon,
    d_min: f64,
    max_gap: f64,
) -> Result<Vec<AnchorPoint>, AnchorError> {
    if d_min <= 0.0 {
        return Err(AnchorError::NonPositiveParameter("d_min", d_min));
    }
    if max_gap < d_min {
        return Err(AnchorError::GapBelowMinimum { d_min, max_gap });
    }
    let boundary = Boundary::new(footprint)?;

    if candidates.is_empty() {
        return Ok(infill_ring(&boundary, d_min, max_gap));
    }

    let s0 = boundary.param_of(candidates[0].position)?;
    let mut walked: Vec<(f64, AnchorPoint)> = candidates
        .iter()
        .map(|c| {
            boundary
                .param_of(c.position)
                .map(|s| (wrap(s - s0, boundary.total), *c))
        })
        .collect::<Result<_, _>>()?;
    walked.sort_by(|a, b| a.0.total_cmp(&b.0));

    if boundary.total < d_min {
        return Ok(vec![walked[0].1]);
    }

    let mut kept: Vec<(f64, AnchorPoint)> = vec![walked[0]];
    for &(s, c) in &walked[1..] {
        if s - kept.last().unwrap().0 >= d_min {
            kept.push((s, c));
        }
    }
    // closing the loop: the last kept anchor must clear the first as well
    while kept.len() > 1 && boundary.total - kept.last().unwrap().0 + kept[0].0 < d_min {
        kept.pop();
    }

    let mut out = Vec::new();
    for i in 0..kept.len() {
        let (s, anchor) = kept[i];
        out.push(anchor);
        let s_next = if i + 1 < kept.len() {
            kept[i + 1].0
        } else {
            boundary.total + kept[0].0
        };
        let span = s_next - s;
        if span > max_gap {
            let segments = (span / max_gap).ceil() as usize;
            for j in 1..segments {
                out.push(AnchorPoint {
                    position: boundary.point_at(s0 + s + span * j as f64 / segments as f64),
                    source: AnchorSource::Infill,
                });
            }
        }
    }
    Ok(out)
}

/// With no corners to start from, ring the boundary with evenly spaced
/// infill anchors starting at the first footprint vertex.
fn infill_ring(boundary: &Boundary, d_min: f64, max_gap: f64) -> Vec<AnchorPoint> {
    if boundary.total < d_min {
        return vec![AnchorPoint {
            position: boundary.point_at(0.0),
            source: AnchorSource::Infill,
        }];
    }
    let count = (boundary.total / max_gap).ceil().max(1.0) as usize;
    (0..count)
        .map(|i| AnchorPoint {
            position: boundary.point_at(boundary.total * i as f64 / count as f64),
            source: AnchorSource::Infill,
        })
        .collect()
}

fn wrap(s: f64, total: f64) -> f64 {
    let r = s.rem_euclid(total);
    if r >= total {
        r - total
    } else {
        r
    }
}

/// Arc-length parametrization of the footprint boundary.
pub(crate) struct Boundary {
    verts: Vec<[f64; 2]>,
    cumulative: Vec<f64>,
    pub(crate) total: f64,
}

impl Boundary {
    pub(crate) fn new(footprint: &FootprintPolygon) -> Result<Self, AnchorError> {
        let verts = footprint.vertices.clone();
        if verts.len() < 3 {
            return Err(AnchorError::DegenerateFootprint(verts.len()));
        }
        let mut cumulative = Vec::with_capacity(verts.len() + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for i in 0..verts.len() {
            let a = verts[i];
            let b = verts[(i + 1) % verts.len()];
            acc += ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
            cumulative.push(acc);
        }
        Ok(Self {
            verts,
            cumulative,
            total: acc,
        })
    }

    /// Point at arc length `s` from vertex 0, wrapping around.
    pub(crate) fn point_at(&self, s: f64) -> [f64; 2] {
        let s = wrap(s, self.total);
        let seg = match self
            .cumulative
            .binary_search_by(|c| c.total_cmp(&s))
        {
            Ok(i) => i.min(self.verts.len() - 1),
            Err(i) => i - 1,
        };
        let a = self.verts[seg];
        let b = self.verts[(seg + 1) % self.verts.len()];
        let seg_len = self.cumulative[seg + 1] - self.cumulative[seg];
        let t = if seg_len > 0.0 {
            (s - self.cumulative[seg]) / seg_len
        } else {
            0.0
        };
        [a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t]
    }

    /// Arc-length parameter of a point lying on the boundary.
    pub(crate) fn param_of(&self, p: [f64; 2]) -> Result<f64, AnchorError> {
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..self.verts.len() {
            let a = self.verts[i];
            let b = self.verts[(i + 1) % self.verts.len()];
            let ab = [b[0] - a[0], b[1] - a[1]];
            let len2 = ab[0] * ab[0] + ab[1] * ab[1];
            let t = if len2 > 0.0 {
                (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let q = [a[0] + ab[0] * t, a[1] + ab[1] * t];
            let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
            if d < best.0 {
                best = (d, self.cumulative[i] + t * (len2).sqrt());
            }
        }
        if best.0 > ON_BOUNDARY_TOLERANCE {
            return Err(AnchorError::CandidateOffBoundary(p[0], p[1], best.0));
        }
        Ok(wrap(best.1, self.total))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(w: f64, h: f64) -> FootprintPolygon {
        FootprintPolygon {
            vertices: vec![[0.0, 0.0], [w, 0.0], [w, h], [0.0, h]],
        }
    }

    fn l_shape() -> FootprintPolygon {
        FootprintPolygon {
            vertices: vec![
                [0.0, 0.0],
                [4.0, 0.0],
                [4.0, 2.0],
                [2.0, 2.0],
                [2.0, 4.0],
                [0.0, 4.0],
            ],
        }
    }

    fn near_circle(n: usize, r: f64) -> FootprintPolygon {
        FootprintPolygon {
            vertices: (0..n)
                .map(|i| {
                    let a = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                    [r * a.cos(), r * a.sin()]
                })
                .collect(),
        }
    }

    /// Shortest along-boundary distance between two points.
    fn boundary_distance(fp: &FootprintPolygon, p: [f64; 2], q: [f64; 2]) -> f64 {
        let b = Boundary::new(fp).unwrap();
        let (sp, sq) = (b.param_of(p).unwrap(), b.param_of(q).unwrap());
        let fwd = wrap(sq - sp, b.total);
        fwd.min(b.total - fwd)
    }

    #[test]
    fn rectangle_has_exactly_four_corner_candidates() {
        let c = analyze_foundation(&rect(4.0, 3.0), 10.0).unwrap();
        assert_eq!(c.len(), 4);
        assert!(c.iter().all(|a| a.source == AnchorSource::Corner));
        assert_eq!(c[0].position, [0.0, 0.0]);
        assert_eq!(c[2].position, [4.0, 3.0]);
    }

    #[test]
    fn l_shape_has_six_candidates_one_reflex() {
        let c = analyze_foundation(&l_shape(), 10.0).unwrap();
        assert_eq!(c.len(), 6);
        let reflex: Vec<_> = c
            .iter()
            .filter(|a| a.source == AnchorSource::Inflection)
            .collect();
        assert_eq!(reflex.len(), 1);
        assert_eq!(reflex[0].position, [2.0, 2.0]);
    }

    #[test]
    fn near_circle_has_no_candidates() {
        let c = analyze_foundation(&near_circle(360, 5.0), 10.0).unwrap();
        assert!(c.is_empty(), "per-vertex turn is 1 degree");
    }

    #[test]
    fn collinear_vertex_is_never_a_candidate() {
        let fp = FootprintPolygon {
            vertices: vec![[0.0, 0.0], [2.0, 0.0], [4.0, 0.0], [4.0, 3.0], [0.0, 3.0]],
        };
        let c = analyze_foundation(&fp, 10.0).unwrap();
        assert_eq!(c.len(), 4);
        assert!(!c.iter().any(|a| a.position == [2.0, 0.0]));
    }

    #[test]
    fn loose_gap_keeps_only_corners() {
        let fp = rect(4.0, 3.0);
        let cand = analyze_foundation(&fp, 10.0).unwrap();
        let placed = place_anchors(&cand, &fp, 1.0, 100.0).unwrap();
        assert_eq!(placed.len(), 4);
        assert!(placed.iter().all(|a| a.source == AnchorSource::Corner));
    }

    #[test]
    fn tight_gap_adds_infill_within_both_bounds() {
        let fp = rect(4.0, 3.0);
        let cand = analyze_foundation(&fp, 10.0).unwrap();
        let placed = place_anchors(&cand, &fp, 1.0, 2.0).unwrap();
        // sides of 4 and 3 each get one midpoint
        assert_eq!(placed.len(), 8);
        for i in 0..placed.len() {
            for j in i + 1..placed.len() {
                let d = boundary_distance(&fp, placed[i].position, placed[j].position);
                assert!(d >= 1.0 - 1e-9, "pair {i},{j} only {d} apart");
            }
        }
        let b = Boundary::new(&fp).unwrap();
        let mut params: Vec<f64> = placed
            .iter()
            .map(|a| b.param_of(a.position).unwrap())
            .collect();
        params.sort_by(f64::total_cmp);
        for i in 0..params.len() {
            let next = if i + 1 < params.len() {
                params[i + 1]
            } else {
                params[0] + b.total
            };
            assert!(next - params[i] <= 2.0 + 1e-9, "span {} too wide", next - params[i]);
        }
    }

    #[test]
    fn nearby_second_corner_is_skipped() {
        let fp = rect(0.5, 10.0);
        let cand = analyze_foundation(&fp, 10.0).unwrap();
        assert_eq!(cand.len(), 4);
        let placed = place_anchors(&cand, &fp, 1.0, 100.0).unwrap();
        assert_eq!(placed.len(), 2);
        assert_eq!(placed[0].position, [0.0, 0.0]);
        assert_eq!(placed[1].position, [0.5, 10.0]);
    }

    #[test]
    fn wraparound_conflict_drops_the_later_anchor() {
        let fp = FootprintPolygon {
            vertices: vec![[0.0, 0.0], [4.0, 0.0], [4.0, 4.0], [0.0, 4.0], [0.2, 0.5]],
        };
        let cand = analyze_foundation(&fp, 10.0).unwrap();
        assert_eq!(cand.len(), 5);
        let placed = place_anchors(&cand, &fp, 1.0, 100.0).unwrap();
        assert_eq!(placed.len(), 4);
        assert!(!placed.iter().any(|a| a.position == [0.2, 0.5]));
    }

    #[test]
    fn tiny_perimeter_collapses_to_single_anchor() {
        let fp = rect(0.1, 0.1);
        let cand = analyze_foundation(&fp, 10.0).unwrap();
        let placed = place_anchors(&cand, &fp, 1.0, 1.0).unwrap();
        assert_eq!(placed.len(), 1);
        assert_eq!(placed[0].position, [0.0, 0.0]);
    }

    #[test]
    fn candidate_free_boundary_gets_a_ring_of_infill() {
        let fp = near_circle(360, 5.0);
        let cand = analyze_foundation(&fp, 10.0).unwrap();
        let placed = place_anchors(&cand, &fp, 1.0, 4.0).unwrap();
        // perimeter ~31.4 m: 8 anchors, spacing ~3.93 m
        assert_eq!(placed.len(), 8);
        assert!(placed.iter().all(|a| a.source == AnchorSource::Infill));
        for i in 0..placed.len() {
            let d = boundary_distance(
                &fp,
                placed[i].position,
                placed[(i + 1) % placed.len()].position,
            );
            assert!((1.0..=4.0).contains(&d), "spacing {d}");
        }
    }

    #[test]
    fn placement_is_deterministic() {
        let fp = l_shape();
        let cand = analyze_foundation(&fp, 10.0).unwrap();
        let a = place_anchors(&cand, &fp, 1.0, 2.0).unwrap();
        let b = place_anchors(&cand, &fp, 1.0, 2.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn off_boundary_candidate_is_rejected() {
        let fp = rect(4.0, 3.0);
        let cand = vec![AnchorPoint {
            position: [2.0, 1.5],
            source: AnchorSource::Corner,
        }];
        assert!(matches!(
            place_anchors(&cand, &fp, 1.0, 4.0),
            Err(AnchorError::CandidateOffBoundary(..))
        ));
    }

    #[test]
    fn anchors_lie_on_the_boundary() {
        let fp = l_shape();
        let cand = analyze_foundation(&fp, 10.0).unwrap();
        let placed = place_anchors(&cand, &fp, 1.0, 1.5).unwrap();
        let b = Boundary::new(&fp).unwrap();
        for a in &placed {
            b.param_of(a.position).unwrap();
        }
    }
}
