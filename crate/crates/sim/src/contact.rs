//! Contact generation: piece against piece and piece against the terrain
//! plane.
//!
//! Piece pairs go through separating-axis tests over the face normals of both
//! polytopes, then the incident face is clipped against the reference face to
//! get a manifold. Edge-edge axes are skipped; rubble contact is dominated by
//! face and vertex cases and the positional bias recovers the rest. Points are
//! kept while they are within `margin` of touching, so a fast approach still
//! produces a row that can stop it before it crosses the surface.

use rubble_geom::polytope::ConvexPolytope;
use rubble_geom::{Quat, Vec3};

#[derive(Debug, Clone)]
pub(crate) struct CollisionShape {
    pub verts: Vec<Vec3>,
    pub faces: Vec<FaceDef>,
}

#[derive(Debug, Clone)]
pub(crate) struct FaceDef {
    pub normal: Vec3,
    pub verts: Vec<usize>,
}

impl CollisionShape {
    pub fn new(poly: &ConvexPolytope) -> Self {
        let verts = poly.vertices().to_vec();
        let faces = (0..poly.faces().len())
            .map(|f| {
                let (normal, _) = poly.face_plane(f);
                FaceDef {
                    normal,
                    verts: poly.faces()[f].clone(),
                }
            })
            .collect();
        Self { verts, faces }
    }
}

/// A shape placed in the world for one frame.
pub(crate) struct ShapeInstance<'s> {
    pub shape: &'s CollisionShape,
    pub verts: Vec<Vec3>,
    pub normals: Vec<Vec3>,
}

impl<'s> ShapeInstance<'s> {
    pub fn new(shape: &'s CollisionShape, position: Vec3, orientation: Quat) -> Self {
        let verts = shape
            .verts
            .iter()
            .map(|v| orientation * v + position)
            .collect();
        let normals = shape
            .faces
            .iter()
            .map(|f| orientation * f.normal)
            .collect();
        Self {
            shape,
            verts,
            normals,
        }
    }

    fn support_min(&self, dir: &Vec3) -> f64 {
        self.verts
            .iter()
            .map(|v| dir.dot(v))
            .fold(f64::INFINITY, f64::min)
    }

    /// Face of `self` with the largest gap to `other`; gap > 0 means the face
    /// plane separates the bodies by that distance.
    fn best_face(&self, other: &ShapeInstance) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (i, normal) in self.normals.iter().enumerate() {
            let d = normal.dot(&self.verts[self.shape.faces[i].verts[0]]);
            let gap = other.support_min(normal) - d;
            if gap > best.1 {
                best = (i, gap);
            }
        }
        best
    }

    fn face_polygon(&self, face: usize) -> Vec<Vec3> {
        self.shape.faces[face]
            .verts
            .iter()
            .map(|&i| self.verts[i])
            .collect()
    }

    /// Face whose world normal is most opposed to `dir`.
    fn incident_face(&self, dir: &Vec3) -> usize {
        let mut best = (0, f64::INFINITY);
        for (i, normal) in self.normals.iter().enumerate() {
            let d = normal.dot(dir);
            if d < best.1 {
                best = (i, d);
            }
        }
        best.0
    }
}

/// One manifold, normal pointing from body `a` toward body `b`. Depth is
/// positive when penetrating, negative (down to `-margin`) when nearby.
#[derive(Debug, Clone)]
pub(crate) struct Manifold {
    pub normal: Vec3,
    pub points: Vec<ContactPoint>,
    /// Face pair that produced the manifold, for warm-start identity.
    pub ref_face: u32,
    pub inc_face: u32,
    pub ref_is_a: bool,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct ContactPoint {
    pub point: Vec3,
    pub depth: f64,
}

fn clip_polygon_edge(poly: &mut Vec<Vec3>, plane_n: Vec3, plane_d: f64) {
    if poly.is_empty() {
        return;
    }
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let cur = poly[i];
        let nxt = poly[(i + 1) % poly.len()];
        let dc = plane_n.dot(&cur) - plane_d;
        let dn = plane_n.dot(&nxt) - plane_d;
        if dc >= 0.0 {
            out.push(cur);
        }
        let crosses = (dc > 0.0 && dn < 0.0) || (dc < 0.0 && dn > 0.0);
        if crosses {
            let t = dc / (dc - dn);
            out.push(cur + (nxt - cur) * t);
        }
    }
    *poly = out;
}

pub(crate) fn contact_manifold(
    a: &ShapeInstance,
    b: &ShapeInstance,
    margin: f64,
) -> Option<Manifold> {
    let (face_a, gap_a) = a.best_face(b);
    if gap_a > margin {
        return None;
    }
    let (face_b, gap_b) = b.best_face(a);
    if gap_b > margin {
        return None;
    }

    let ref_is_a = gap_a >= gap_b;
    let (reference, incident, ref_face) = if ref_is_a {
        (a, b, face_a)
    } else {
        (b, a, face_b)
    };
    let ref_normal = reference.normals[ref_face];
    let ref_poly = reference.face_polygon(ref_face);
    let ref_d = ref_normal.dot(&ref_poly[0]);

    let inc_face = incident.incident_face(&ref_normal);
    let mut poly = incident.face_polygon(inc_face);

    for i in 0..ref_poly.len() {
        let v0 = ref_poly[i];
        let v1 = ref_poly[(i + 1) % ref_poly.len()];
        let inward = ref_normal.cross(&(v1 - v0));
        let norm = inward.norm();
        if norm < 1e-12 {
            continue;
        }
        let inward = inward / norm;
        clip_polygon_edge(&mut poly, inward, inward.dot(&v0));
    }

    let mut unique: Vec<Vec3> = Vec::with_capacity(poly.len());
    for p in poly {
        if unique.iter().all(|q| (p - q).norm() > 1e-9) {
            unique.push(p);
        }
    }
    let mut points: Vec<ContactPoint> = unique
        .iter()
        .filter_map(|p| {
            let sep = ref_normal.dot(p) - ref_d;
            if sep < margin {
                Some(ContactPoint {
                    point: p - ref_normal * (sep * 0.5),
                    depth: -sep,
                })
            } else {
                None
            }
        })
        .collect();

    // Clipping can come up empty on glancing vertex contact; keep the
    // incident vertex closest to the reference plane instead.
    if points.is_empty() {
        let deepest = incident
            .shape
            .faces[inc_face]
            .verts
            .iter()
            .map(|&i| incident.verts[i])
            .min_by(|p, q| {
                ref_normal
                    .dot(p)
                    .partial_cmp(&ref_normal.dot(q))
                    .unwrap()
            })?;
        let sep = ref_normal.dot(&deepest) - ref_d;
        if sep < margin {
            points.push(ContactPoint {
                point: deepest - ref_normal * (sep * 0.5),
                depth: -sep,
            });
        }
    }
    if points.is_empty() {
        return None;
    }

    let normal = if ref_is_a { ref_normal } else { -ref_normal };
    Some(Manifold {
        normal,
        points,
        ref_face: ref_face as u32,
        inc_face: inc_face as u32,
        ref_is_a,
    })
}

/// Vertices of a piece near or below the terrain plane `z = terrain_z`,
/// tagged with their vertex index. Normal is implicitly +Z, pointing from the
/// terrain into the piece.
pub(crate) fn terrain_manifold(
    verts: &[Vec3],
    terrain_z: f64,
    margin: f64,
) -> Vec<(usize, ContactPoint)> {
    verts
        .iter()
        .enumerate()
        .filter_map(|(i, v)| {
            let sep = v.z - terrain_z;
            if sep < margin {
                Some((
                    i,
                    ContactPoint {
                        point: *v,
                        depth: -sep,
                    },
                ))
            } else {
                None
            }
        })
        .collect()
}

pub(crate) fn aabb_of(verts: &[Vec3]) -> (Vec3, Vec3) {
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for v in verts {
        lo = lo.inf(v);
        hi = hi.sup(v);
    }
    (lo, hi)
}

pub(crate) fn aabbs_overlap(a: &(Vec3, Vec3), b: &(Vec3, Vec3), margin: f64) -> bool {
    (0..3).all(|k| a.0[k] - margin <= b.1[k] && b.0[k] - margin <= a.1[k])
}
