//! Glue bonds between fracture pieces, found by matching coplanar contact
//! faces at rest poses.

use serde::{Deserialize, Serialize};

use crate::fracture::GeometryCollection;
use crate::material::MaterialTable;
use crate::polytope::ConvexPolytope;
use crate::Vec3;

/// A breakable rigid link between two pieces sharing a contact patch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bond {
    pub piece_a: u64,
    pub piece_b: u64,
    /// Contact patch area, m^2.
    pub contact_area: f64,
    /// Accumulated impulse that snaps the bond, N*s.
    pub break_impulse: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BondGraph {
    pub edges: Vec<Bond>,
}

impl BondGraph {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Ids of pieces bonded to `id`.
    pub fn neighbors(&self, id: u64) -> impl Iterator<Item = u64> + '_ {
        self.edges.iter().filter_map(move |b| {
            if b.piece_a == id {
                Some(b.piece_b)
            } else if b.piece_b == id {
                Some(b.piece_a)
            } else {
                None
            }
        })
    }
}

const ANGLE_EPS: f64 = 1e-6;
const AREA_EPS: f64 = 1e-8;

/// Build the bond graph for a collection at rest. Two pieces bond when they
/// have anti-parallel faces lying within `gap_tolerance` of one plane that
/// overlap with positive area. Bond strength comes from the weaker material.
pub fn build_bond_graph(
    collection: &GeometryCollection,
    materials: &MaterialTable,
    gap_tolerance: f64,
) -> BondGraph {
    let world: Vec<ConvexPolytope> = collection
        .pieces
        .iter()
        .map(|p| p.world_polytope())
        .collect();
    let boxes: Vec<(Vec3, Vec3)> = world.iter().map(|p| p.aabb()).collect();

    let mut edges = Vec::new();
    for i in 0..world.len() {
        for j in (i + 1)..world.len() {
            let (alo, ahi) = boxes[i];
            let (blo, bhi) = boxes[j];
            let near = (0..3).all(|k| alo[k] <= bhi[k] + gap_tolerance && blo[k] <= ahi[k] + gap_tolerance);
            if !near {
                continue;
            }
            let area = contact_area(&world[i], &world[j], gap_tolerance);
            if area > AREA_EPS {
                let sa = materials
                    .get(&collection.pieces[i].material_id)
                    .map_or(f64::INFINITY, |m| m.bond_strength);
                let sb = materials
                    .get(&collection.pieces[j].material_id)
                    .map_or(f64::INFINITY, |m| m.bond_strength);
                let strength = sa.min(sb);
                edges.push(Bond {
                    piece_a: collection.pieces[i].id,
                    piece_b: collection.pieces[j].id,
                    contact_area: area,
                    break_impulse: strength * area,
                });
            }
        }
    }
    edges.sort_by(|a, b| (a.piece_a, a.piece_b).cmp(&(b.piece_a, b.piece_b)));
    BondGraph { edges }
}

/// Total overlap area of anti-parallel face pairs within the gap tolerance.
pub fn contact_area(a: &ConvexPolytope, b: &ConvexPolytope, gap_tolerance: f64) -> f64 {
    let mut total = 0.0;
    for fa in 0..a.faces().len() {
        let (na, da) = a.face_plane(fa);
        for fb in 0..b.faces().len() {
            let (nb, db) = b.face_plane(fb);
            if na.dot(&nb) > -1.0 + ANGLE_EPS {
                continue;
            }
            // planes na.x = da and na.x = -db must nearly coincide
            if (da + db).abs() > gap_tolerance {
                continue;
            }
            total += face_overlap_area(a, fa, b, fb, &na);
        }
    }
    total
}

fn face_overlap_area(
    a: &ConvexPolytope,
    fa: usize,
    b: &ConvexPolytope,
    fb: usize,
    normal: &Vec3,
) -> f64 {
    let (u, v) = plane_basis(normal);
    let project = |poly: &ConvexPolytope, face: usize| -> Vec<[f64; 2]> {
        poly.faces()[face]
            .iter()
            .map(|&vi| {
                let p = poly.vertices()[vi];
                [u.dot(&p), v.dot(&p)]
            })
            .collect()
    };
    let pa = project(a, fa);
    let mut pb = project(b, fb);
    // b's face winds CCW seen from its own outward side, which is the
    // opposite side here
    pb.reverse();
    convex_intersection_area(&pa, &pb)
}

fn plane_basis(n: &Vec3) -> (Vec3, Vec3) {
    let pick = if n.x.abs() < 0.9 {
        Vec3::x()
    } else {
        Vec3::y()
    };
    let u = n.cross(&pick).normalize();
    let v = n.cross(&u);
    (u, v)
}

/// Area of the intersection of two convex CCW polygons, by clipping one
/// against each edge half-plane of the other.
pub fn convex_intersection_area(subject: &[[f64; 2]], clip: &[[f64; 2]]) -> f64 {
    if subject.len() < 3 || clip.len() < 3 {
        return 0.0;
    }
    let mut poly = subject.to_vec();
    for k in 0..clip.len() {
        let a = clip[k];
        let b = clip[(k + 1) % clip.len()];
        let inside = |p: [f64; 2]| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= 0.0;
        let mut next = Vec::with_capacity(poly.len() + 1);
        for i in 0..poly.len() {
            let cur = poly[i];
            let prev = poly[(i + poly.len() - 1) % poly.len()];
            let cur_in = inside(cur);
            let prev_in = inside(prev);
            if cur_in != prev_in {
                next.push(edge_intersect(prev, cur, a, b));
            }
            if cur_in {
                next.push(cur);
            }
        }
        poly = next;
        if poly.len() < 3 {
            return 0.0;
        }
    }
    shoelace(&poly).abs()
}

fn edge_intersect(p: [f64; 2], q: [f64; 2], a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    let d1 = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
    let d2 = (b[0] - a[0]) * (q[1] - a[1]) - (b[1] - a[1]) * (q[0] - a[0]);
    let t = d1 / (d1 - d2);
    [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
}

fn shoelace(poly: &[[f64; 2]]) -> f64 {
    let mut s = 0.0;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        s += a[0] * b[1] - b[0] * a[1];
    }
    s / 2.0
}
