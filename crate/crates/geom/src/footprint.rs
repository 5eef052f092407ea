//! Ground footprint extraction: which outline does the building press into
//! the terrain. Anchor placement walks this ring.

use geo::{Area, BooleanOps, ConvexHull, Coord, LineString, MultiPoint, MultiPolygon, Polygon};
use serde::{Deserialize, Serialize};

use crate::error::GeomError;
use crate::solid::SolidPrimitive;

/// Closed outer boundary of the grounded part of a model, as an open CCW
/// vertex ring in the ground plane (z = 0). Interior holes are dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FootprintPolygon {
    pub vertices: Vec<[f64; 2]>,
}

impl FootprintPolygon {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices).abs()
    }

    pub fn perimeter(&self) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
            })
            .sum()
    }

    /// Vertex ring as (prev, here, next) triples, in order.
    pub fn corners(&self) -> impl Iterator<Item = ([f64; 2], [f64; 2], [f64; 2])> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| {
            (
                self.vertices[(i + n - 1) % n],
                self.vertices[i],
                self.vertices[(i + 1) % n],
            )
        })
    }
}

fn signed_area(ring: &[[f64; 2]]) -> f64 {
    let n = ring.len();
    let mut s = 0.0;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        s += a[0] * b[1] - b[0] * a[1];
    }
    s / 2.0
}

/// Extract the ground footprint of a model. Solids whose lowest point sits
/// within `ground_tolerance` of z = 0 count as grounded; their convex hull
/// shadows are unioned in the plane. Errors when nothing is grounded or the
/// union splits into separate regions.
pub fn extract_footprint(
    solids: &[SolidPrimitive],
    ground_tolerance: f64,
) -> Result<FootprintPolygon, GeomError> {
    let mut hulls: Vec<Polygon<f64>> = Vec::new();
    for solid in solids {
        let world = solid.world_polytope();
        let min_z = world
            .vertices()
            .iter()
            .map(|v| v.z)
            .fold(f64::INFINITY, f64::min);
        if min_z.abs() > ground_tolerance {
            continue;
        }
        let points: MultiPoint<f64> = world
            .vertices()
            .iter()
            .map(|v| Coord { x: v.x, y: v.y })
            .collect::<Vec<_>>()
            .into();
        let hull = points.convex_hull();
        if hull.unsigned_area() > 1e-12 {
            hulls.push(hull);
        }
    }
    if hulls.is_empty() {
        return Err(GeomError::FloatingBuilding {
            tolerance: ground_tolerance,
        });
    }

    let mut union = MultiPolygon::new(vec![hulls[0].clone()]);
    for hull in &hulls[1..] {
        union = union.union(&MultiPolygon::new(vec![hull.clone()]));
    }
    if union.0.len() != 1 {
        return Err(GeomError::DisconnectedFootprint(union.0.len()));
    }

    let ring = ring_from_linestring(union.0[0].exterior());
    if ring.len() < 3 {
        return Err(GeomError::DegenerateFootprint);
    }
    Ok(FootprintPolygon { vertices: ring })
}

fn ring_from_linestring(ls: &LineString<f64>) -> Vec<[f64; 2]> {
    let mut ring: Vec<[f64; 2]> = ls.0.iter().map(|c| [c.x, c.y]).collect();
    if ring.len() > 1 && ring.first() == ring.last() {
        ring.pop();
    }
    if signed_area(&ring) < 0.0 {
        ring.reverse();
    }
    collapse_collinear(ring)
}

fn collapse_collinear(ring: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    let n = ring.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let p = ring[(i + n - 1) % n];
        let c = ring[i];
        let q = ring[(i + 1) % n];
        let e1 = [c[0] - p[0], c[1] - p[1]];
        let e2 = [q[0] - c[0], q[1] - c[1]];
        let cross = e1[0] * e2[1] - e1[1] * e2[0];
        let scale = (e1[0].hypot(e1[1]) * e2[0].hypot(e2[1])).max(1e-12);
        if (cross / scale).abs() > 1e-9 {
            out.push(c);
        }
    }
    out
}
