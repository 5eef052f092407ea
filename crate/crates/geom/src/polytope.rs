//! Convex polytopes with exact volume, centroid, and inertia integrals.
//!
//! Every solid and fracture piece in the pipeline is a convex polytope kept
//! as a vertex list plus face loops (counter-clockwise seen from outside).
//! Fracture is repeated half-space clipping, so the clip routine is the
//! workhorse here.

use serde::{Deserialize, Serialize};

use crate::{Mat3, Vec3};

/// Vertices closer than this are merged when rebuilding after a clip.
const MERGE_EPS: f64 = 1e-12;

/// Default plane-side classification tolerance, in meters.
pub const PLANE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexPolytope {
    vertices: Vec<Vec3>,
    /// Face loops, CCW viewed from outside the solid.
    faces: Vec<Vec<usize>>,
}

impl ConvexPolytope {
    pub fn new(vertices: Vec<Vec3>, faces: Vec<Vec<usize>>) -> Self {
        Self { vertices, faces }
    }

    /// Axis-aligned box with its minimum corner at the origin.
    pub fn from_box(size: Vec3) -> Self {
        let (sx, sy, sz) = (size.x, size.y, size.z);
        let vertices = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(sx, 0.0, 0.0),
            Vec3::new(sx, sy, 0.0),
            Vec3::new(0.0, sy, 0.0),
            Vec3::new(0.0, 0.0, sz),
            Vec3::new(sx, 0.0, sz),
            Vec3::new(sx, sy, sz),
            Vec3::new(0.0, sy, sz),
        ];
        let faces = vec![
            vec![0, 3, 2, 1], // bottom (z = 0), outward -z
            vec![4, 5, 6, 7], // top, outward +z
            vec![0, 1, 5, 4], // front (y = 0), outward -y
            vec![2, 3, 7, 6], // back, outward +y
            vec![0, 4, 7, 3], // left (x = 0), outward -x
            vec![1, 2, 6, 5], // right, outward +x
        ];
        Self { vertices, faces }
    }

    /// Prism: a CCW convex polygon in the xy plane extruded from z = 0 to z = height.
    pub fn from_extrusion(polygon: &[[f64; 2]], height: f64) -> Self {
        let k = polygon.len();
        let mut vertices = Vec::with_capacity(2 * k);
        for p in polygon {
            vertices.push(Vec3::new(p[0], p[1], 0.0));
        }
        for p in polygon {
            vertices.push(Vec3::new(p[0], p[1], height));
        }
        let mut faces = Vec::with_capacity(k + 2);
        // bottom viewed from below must wind CCW, i.e. reversed polygon order
        faces.push((0..k).rev().collect());
        faces.push((k..2 * k).collect());
        for i in 0..k {
            let j = (i + 1) % k;
            faces.push(vec![i, j, k + j, k + i]);
        }
        Self { vertices, faces }
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[Vec<usize>] {
        &self.faces
    }

    pub fn face_polygon(&self, face: usize) -> Vec<Vec3> {
        self.faces[face].iter().map(|&i| self.vertices[i]).collect()
    }

    /// Unit outward normal and plane offset `d` (plane is `n . x = d`),
    /// computed with Newell's method so slightly non-planar loops stay stable.
    pub fn face_plane(&self, face: usize) -> (Vec3, f64) {
        let loop_ = &self.faces[face];
        let mut n = Vec3::zeros();
        let mut centroid = Vec3::zeros();
        for i in 0..loop_.len() {
            let a = self.vertices[loop_[i]];
            let b = self.vertices[loop_[(i + 1) % loop_.len()]];
            n.x += (a.y - b.y) * (a.z + b.z);
            n.y += (a.z - b.z) * (a.x + b.x);
            n.z += (a.x - b.x) * (a.y + b.y);
            centroid += a;
        }
        centroid /= loop_.len() as f64;
        let n = n.normalize();
        (n, n.dot(&centroid))
    }

    pub fn aabb(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    pub fn translated(&self, offset: Vec3) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| v + offset).collect(),
            faces: self.faces.clone(),
        }
    }

    pub fn transformed(&self, iso: &crate::Iso3) -> Self {
        Self {
            vertices: self
                .vertices
                .iter()
                .map(|v| iso.transform_point(&(*v).into()).coords)
                .collect(),
            faces: self.faces.clone(),
        }
    }

    /// True if the point satisfies every face half-space within `eps`.
    pub fn contains(&self, p: &Vec3, eps: f64) -> bool {
        (0..self.faces.len()).all(|f| {
            let (n, d) = self.face_plane(f);
            n.dot(p) <= d + eps
        })
    }

    /// Clip against the half-space `n . x <= d`. Returns `None` when nothing
    /// with volume remains. `n` must be unit length.
    pub fn clip_halfspace(&self, n: Vec3, d: f64) -> Option<Self> {
        let dists: Vec<f64> = self.vertices.iter().map(|v| n.dot(v) - d).collect();
        if dists.iter().all(|&t| t <= PLANE_EPS) {
            return Some(self.clone());
        }
        if dists.iter().all(|&t| t >= -PLANE_EPS) {
            return None;
        }

        let mut out_vertices: Vec<Vec3> = Vec::new();
        let mut vertex_map: Vec<Option<usize>> = vec![None; self.vertices.len()];
        // intersection vertex per crossing edge, shared by both adjacent faces
        let mut edge_cut: std::collections::BTreeMap<(usize, usize), usize> =
            std::collections::BTreeMap::new();
        let push_vertex = |v: Vec3, out: &mut Vec<Vec3>| -> usize {
            for (i, w) in out.iter().enumerate() {
                if (v - w).norm_squared() < MERGE_EPS * MERGE_EPS {
                    return i;
                }
            }
            out.push(v);
            out.len() - 1
        };

        let mut out_faces: Vec<Vec<usize>> = Vec::new();
        let mut cap_points: Vec<usize> = Vec::new();
        for loop_ in &self.faces {
            let mut new_loop: Vec<usize> = Vec::new();
            for i in 0..loop_.len() {
                let a = loop_[i];
                let b = loop_[(i + 1) % loop_.len()];
                let (da, db) = (dists[a], dists[b]);
                if da <= PLANE_EPS {
                    let idx = match vertex_map[a] {
                        Some(idx) => idx,
                        None => {
                            let idx = push_vertex(self.vertices[a], &mut out_vertices);
                            vertex_map[a] = Some(idx);
                            idx
                        }
                    };
                    new_loop.push(idx);
                    if da.abs() <= PLANE_EPS && !cap_points.contains(&idx) {
                        cap_points.push(idx);
                    }
                }
                let crossing = (da < -PLANE_EPS && db > PLANE_EPS) || (da > PLANE_EPS && db < -PLANE_EPS);
                if crossing {
                    let key = (a.min(b), a.max(b));
                    let idx = match edge_cut.get(&key) {
                        Some(&idx) => idx,
                        None => {
                            let t = da / (da - db);
                            let p = self.vertices[a] + (self.vertices[b] - self.vertices[a]) * t;
                            let idx = push_vertex(p, &mut out_vertices);
                            edge_cut.insert(key, idx);
                            idx
                        }
                    };
                    new_loop.push(idx);
                    if !cap_points.contains(&idx) {
                        cap_points.push(idx);
                    }
                }
            }
            new_loop.dedup();
            if new_loop.len() > 1 && new_loop.first() == new_loop.last() {
                new_loop.pop();
            }
            if new_loop.len() >= 3 {
                out_faces.push(new_loop);
            }
        }

        if cap_points.len() >= 3 {
            let cap = order_cap_face(&out_vertices, &cap_points, n);
            if cap.len() >= 3 {
                out_faces.push(cap);
            }
        }
        if out_faces.len() < 4 {
            return None;
        }
        Some(Self {
            vertices: out_vertices,
            faces: out_faces,
        })
    }

    /// Clip to the intersection with another convex polytope (all of `other`'s
    /// face half-spaces applied in order).
    pub fn intersect(&self, other: &ConvexPolytope) -> Option<ConvexPolytope> {
        let mut cur = self.clone();
        for f in 0..other.faces.len() {
            let (n, d) = other.face_plane(f);
            cur = cur.clip_halfspace(n, d)?;
        }
        Some(cur)
    }

    pub fn volume(&self) -> f64 {
        let mut v6 = 0.0;
        for loop_ in &self.faces {
            let a = self.vertices[loop_[0]];
            for i in 1..loop_.len() - 1 {
                let b = self.vertices[loop_[i]];
                let c = self.vertices[loop_[i + 1]];
                v6 += a.dot(&b.cross(&c));
            }
        }
        v6 / 6.0
    }

    pub fn centroid(&self) -> Vec3 {
        let mut vol = 0.0;
        let mut acc = Vec3::zeros();
        for loop_ in &self.faces {
            let a = self.vertices[loop_[0]];
            for i in 1..loop_.len() - 1 {
                let b = self.vertices[loop_[i]];
                let c = self.vertices[loop_[i + 1]];
                let v = a.dot(&b.cross(&c)) / 6.0;
                vol += v;
                acc += (a + b + c) * (v / 4.0);
            }
        }
        acc / vol
    }

    /// Second moment of volume about the origin, `S = integral of x x^T dV`,
    /// integrated tetrahedron by tetrahedron with a degree-2 exact rule.
    pub fn second_moment(&self) -> Mat3 {
        // 4-point degree-2 simplex rule: barycentric (alpha, beta, beta, beta)
        const ALPHA: f64 = 0.585_410_196_624_968_5;
        const BETA: f64 = 0.138_196_601_125_010_5;
        let mut s = Mat3::zeros();
        for loop_ in &self.faces {
            let a = self.vertices[loop_[0]];
            for i in 1..loop_.len() - 1 {
                let b = self.vertices[loop_[i]];
                let c = self.vertices[loop_[i + 1]];
                let v = a.dot(&b.cross(&c)) / 6.0;
                let pts = [Vec3::zeros(), a, b, c];
                let sum: Vec3 = a + b + c;
                for k in 0..4 {
                    let q = pts[k] * ALPHA + (sum - pts[k]) * BETA;
                    s += (q * q.transpose()) * (v / 4.0);
                }
            }
        }
        s
    }

    /// Mass, center of mass, and inertia tensor about the center of mass.
    pub fn mass_properties(&self, density: f64) -> (f64, Vec3, Mat3) {
        let vol = self.volume();
        let com = self.centroid();
        let s = self.second_moment() - (com * com.transpose()) * vol;
        let inertia = (Mat3::identity() * s.trace() - s) * density;
        (density * vol, com, inertia)
    }
}

/// Order on-plane points CCW around their centroid as seen from the +n side,
/// giving the cap face an outward normal of +n.
fn order_cap_face(vertices: &[Vec3], points: &[usize], n: Vec3) -> Vec<usize> {
    let centroid: Vec3 = points.iter().map(|&i| vertices[i]).sum::<Vec3>() / points.len() as f64;
    // plane basis with u x v = n
    let u = if n.x.abs() < 0.9 {
        Vec3::x().cross(&n).normalize()
    } else {
        Vec3::y().cross(&n).normalize()
    };
    let v = n.cross(&u);
    let mut ordered: Vec<(f64, usize)> = points
        .iter()
        .map(|&i| {
            let r = vertices[i] - centroid;
            (r.dot(&v).atan2(r.dot(&u)), i)
        })
        .collect();
    ordered.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    // ascending angle in the (u, v) basis with u x v = n winds the loop so
    // its outward normal is +n, which is the cap's outside
    ordered.into_iter().map(|(_, i)| i).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_volume_and_centroid() {
        let p = ConvexPolytope::from_box(Vec3::new(2.0, 3.0, 4.0));
        assert!((p.volume() - 24.0).abs() < 1e-12);
        let c = p.centroid();
        assert!((c - Vec3::new(1.0, 1.5, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn extrusion_volume() {
        // right triangle, area 0.5, height 3
        let p = ConvexPolytope::from_extrusion(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], 3.0);
        assert!((p.volume() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn unit_cube_inertia_closed_form() {
        let p = ConvexPolytope::from_box(Vec3::repeat(1.0));
        let (mass, com, inertia) = p.mass_properties(2400.0);
        assert!((mass - 2400.0).abs() < 1e-9);
        assert!((com - Vec3::repeat(0.5)).norm() < 1e-12);
        // solid cube: I = m s^2 / 6 on the diagonal
        for i in 0..3 {
            assert!((inertia[(i, i)] - 400.0).abs() < 1e-9, "diag {i}");
            for j in 0..3 {
                if i != j {
                    assert!(inertia[(i, j)].abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn cuboid_inertia_closed_form() {
        // 2 x 1 x 1 at density 1000: mass 2000, I_x = m (b^2 + c^2) / 12
        let p = ConvexPolytope::from_box(Vec3::new(2.0, 1.0, 1.0));
        let (mass, _, inertia) = p.mass_properties(1000.0);
        assert!((mass - 2000.0).abs() < 1e-9);
        assert!((inertia[(0, 0)] - 2000.0 * 2.0 / 12.0).abs() < 1e-8);
        assert!((inertia[(1, 1)] - 2000.0 * 5.0 / 12.0).abs() < 1e-8);
        assert!((inertia[(2, 2)] - 2000.0 * 5.0 / 12.0).abs() < 1e-8);
    }

    #[test]
    fn clip_cube_in_half() {
        let p = ConvexPolytope::from_box(Vec3::repeat(1.0));
        let half = p.clip_halfspace(Vec3::x(), 0.5).unwrap();
        assert!((half.volume() - 0.5).abs() < 1e-12);
        // all vertices on the kept side
        for v in half.vertices() {
            assert!(v.x <= 0.5 + 1e-9);
        }
    }

    #[test]
    fn clip_cube_diagonal() {
        let p = ConvexPolytope::from_box(Vec3::repeat(1.0));
        // cut off the corner at the origin: n . x <= d keeps the far side empty region check
        let n = Vec3::repeat(1.0).normalize();
        let corner = p.clip_halfspace(n, 0.5 / 3.0_f64.sqrt()).unwrap();
        // tetrahedron with legs 0.5: V = 0.5^3 / 6
        assert!((corner.volume() - 0.125 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn clip_away_everything() {
        let p = ConvexPolytope::from_box(Vec3::repeat(1.0));
        assert!(p.clip_halfspace(Vec3::x(), -0.1).is_none());
    }

    #[test]
    fn clip_keeps_everything() {
        let p = ConvexPolytope::from_box(Vec3::repeat(1.0));
        let q = p.clip_halfspace(Vec3::x(), 2.0).unwrap();
        assert_eq!(q.vertices().len(), 8);
        assert!((q.volume() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grazing_clip_is_stable() {
        let p = ConvexPolytope::from_box(Vec3::repeat(1.0));
        // plane exactly on the x = 1 face
        let q = p.clip_halfspace(Vec3::x(), 1.0).unwrap();
        assert!((q.volume() - 1.0).abs() < 1e-12);
        // same plane, other side: everything survives untouched
        let r = p.clip_halfspace(-Vec3::x(), 0.0).unwrap();
        assert!((r.volume() - 1.0).abs() < 1e-12);
        // keep x <= 0: only the grazing face remains, which has no volume
        assert!(p.clip_halfspace(Vec3::x(), 0.0).is_none());
    }

    #[test]
    fn repeated_clips_match_box_intersection() {
        let p = ConvexPolytope::from_box(Vec3::new(4.0, 3.0, 2.0));
        let cell = p
            .clip_halfspace(Vec3::x(), 2.0)
            .and_then(|p| p.clip_halfspace(-Vec3::x(), -1.0))
            .and_then(|p| p.clip_halfspace(Vec3::y(), 1.5))
            .and_then(|p| p.clip_halfspace(-Vec3::z(), -0.5))
            .unwrap();
        // x in [1,2], y in [0,1.5], z in [0.5,2]
        assert!((cell.volume() - 1.0 * 1.5 * 1.5).abs() < 1e-12);
    }

    #[test]
    fn contains_point() {
        let p = ConvexPolytope::from_box(Vec3::repeat(2.0));
        assert!(p.contains(&Vec3::repeat(1.0), 1e-9));
        assert!(!p.contains(&Vec3::new(3.0, 1.0, 1.0), 1e-9));
    }

    #[test]
    fn second_moment_matches_monte_carlo() {
        use rand::{Rng, SeedableRng};
        // irregular polytope: clipped box
        let p = ConvexPolytope::from_box(Vec3::new(1.0, 2.0, 1.5))
            .clip_halfspace(Vec3::new(1.0, 1.0, 1.0).normalize(), 1.8)
            .unwrap();
        let s = p.second_moment();
        let vol = p.volume();

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let (lo, hi) = p.aabb();
        let span = hi - lo;
        let cell_vol = span.x * span.y * span.z;
        let n = 1_000_000;
        let mut hits = 0u64;
        let mut acc = Mat3::zeros();
        for _ in 0..n {
            let q = Vec3::new(
                lo.x + rng.gen::<f64>() * span.x,
                lo.y + rng.gen::<f64>() * span.y,
                lo.z + rng.gen::<f64>() * span.z,
            );
            if p.contains(&q, 1e-12) {
                hits += 1;
                acc += q * q.transpose();
            }
        }
        let mc_vol = cell_vol * hits as f64 / n as f64;
        let mc_s = acc * (cell_vol / n as f64);
        assert!((mc_vol - vol).abs() / vol < 0.01, "volume {mc_vol} vs {vol}");
        for i in 0..3 {
            for j in 0..3 {
                let exact = s[(i, j)];
                assert!(
                    (mc_s[(i, j)] - exact).abs() <= 0.01 * exact.abs().max(0.05),
                    "S[{i}{j}] mc={} exact={}",
                    mc_s[(i, j)],
                    exact
                );
            }
        }
    }
}
