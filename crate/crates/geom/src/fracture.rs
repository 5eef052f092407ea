//! Pre-fracture: carve solids into convex pieces before any simulation runs,
//! so breakage happens along precomputed boundaries.

use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bond::BondGraph;
use crate::error::GeomError;
use crate::material::{FractureStyle, MaterialSpec};
use crate::polytope::ConvexPolytope;
use crate::solid::{Pose, SolidPrimitive};
use crate::{stable_hash, Mat3, Quat, Vec3};

/// One convex fragment of a fractured solid.
///
/// The piece's local frame is its principal inertia frame with the origin at
/// the center of mass; `rest_pose` places that frame into the world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FracturePiece {
    pub id: u64,
    pub polytope: ConvexPolytope,
    pub material_id: String,
    pub mass: f64,
    /// Principal moments of inertia, kg*m^2.
    pub inertia: Vec3,
    pub source_solid: String,
    pub rest_pose: Pose,
    pub volume: f64,
}

impl FracturePiece {
    pub fn world_polytope(&self) -> ConvexPolytope {
        self.polytope.transformed(&self.rest_pose.isometry())
    }
}

/// All pieces of a fractured model plus the glue bonds holding them together.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GeometryCollection {
    pub pieces: Vec<FracturePiece>,
    pub bonds: BondGraph,
    pub rng_seed: u64,
}

impl GeometryCollection {
    pub fn piece(&self, id: u64) -> Option<&FracturePiece> {
        self.pieces.iter().find(|p| p.id == id)
    }

    pub fn total_volume(&self) -> f64 {
        self.pieces.iter().map(|p| p.volume).sum()
    }

    /// Merge collections, renumbering piece ids to stay unique. Bond graphs
    /// are renumbered along; cross-collection bonds are not created here.
    pub fn merge(parts: Vec<GeometryCollection>, rng_seed: u64) -> GeometryCollection {
        let mut merged = GeometryCollection {
            rng_seed,
            ..Default::default()
        };
        let mut offset = 0u64;
        for part in parts {
            let max_id = part.pieces.iter().map(|p| p.id).max().map_or(0, |m| m + 1);
            for mut piece in part.pieces {
                piece.id += offset;
                merged.pieces.push(piece);
            }
            for mut bond in part.bonds.edges {
                bond.piece_a += offset;
                bond.piece_b += offset;
                merged.bonds.edges.push(bond);
            }
            offset += max_id;
        }
        merged
    }
}

/// Fracture one solid into a geometry collection. Deterministic for a fixed
/// seed. A cell target larger than the solid yields a single piece.
pub fn fracture(
    solid: &SolidPrimitive,
    material: &MaterialSpec,
    seed: u64,
) -> Result<GeometryCollection, GeomError> {
    solid.validate()?;
    material.validate()?;
    let local = solid.shape.polytope();
    let volume = local.volume();
    if volume <= 0.0 {
        return Err(GeomError::DegenerateHull);
    }

    let target_count = ((volume / material.fracture_cell_target).round() as usize).max(1);
    let cells: Vec<ConvexPolytope> = if target_count == 1 {
        vec![local.clone()]
    } else {
        match material.fracture_style {
            FractureStyle::Voronoi => voronoi_cells(&local, target_count, seed),
            FractureStyle::Grid => grid_cells(&local, material.fracture_cell_target),
            FractureStyle::PlanarGrain(axis) => {
                planar_cells(&local, target_count, axis.index())
            }
        }
    };

    let iso = solid.pose.isometry();
    let mut pieces = Vec::with_capacity(cells.len());
    for (i, cell) in cells.into_iter().enumerate() {
        let piece = make_piece(
            i as u64,
            cell,
            material,
            &solid.id,
            &solid.material_id,
            &iso,
        )?;
        pieces.push(piece);
    }
    Ok(GeometryCollection {
        pieces,
        bonds: BondGraph::default(),
        rng_seed: seed,
    })
}

fn make_piece(
    id: u64,
    cell: ConvexPolytope,
    material: &MaterialSpec,
    source_solid: &str,
    material_id: &str,
    solid_iso: &crate::Iso3,
    ) -> Result<FracturePiece, GeomError> {
    let volume = cell.volume();
    if !(volume > 0.0) {
        return Err(GeomError::DegenerateHull);
    }
    let (mass, com, inertia) = cell.mass_properties(material.density);
    let (rot, moments) = principal_frame(&inertia);

    // express vertices in the principal frame centered on the COM
    let verts = cell
        .vertices()
        .iter()
        .map(|v| rot.transpose() * (v - com))
        .collect();
    let polytope = ConvexPolytope::new(verts, cell.faces().to_vec());

    let world_com = solid_iso.transform_point(&com.into()).coords;
    let world_rot = solid_iso.rotation * Quat::from_rotation_matrix(&nalgebra::Rotation3::from_matrix_unchecked(rot));
    Ok(FracturePiece {
        id,
        polytope,
        material_id: material_id.to_string(),
        mass,
        inertia: moments,
        source_solid: source_solid.to_string(),
        rest_pose: Pose {
            position: world_com,
            orientation: world_rot,
        },
        volume,
    })
}

/// Canonical principal decomposition of a symmetric inertia tensor: columns
/// sorted by ascending moment, signs fixed, right-handed.
fn principal_frame(inertia: &Mat3) -> (Mat3, Vec3) {
    let eig = SymmetricEigen::new(*inertia);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let moments = Vec3::new(
        eig.eigenvalues[order[0]],
        eig.eigenvalues[order[1]],
        eig.eigenvalues[order[2]],
    );
    let mut e1: Vec3 = eig.eigenvectors.column(order[0]).into();
    let mut e2: Vec3 = eig.eigenvectors.column(order[1]).into();
    let fix = |e: &mut Vec3| {
        let k = e.iamax();
        if e[k] < 0.0 {
            *e = -*e;
        }
    };
    fix(&mut e1);
    fix(&mut e2);
    let e3 = e1.cross(&e2);
    (Mat3::from_columns(&[e1, e2, e3]), moments)
}

fn voronoi_cells(local: &ConvexPolytope, count: usize, seed: u64) -> Vec<ConvexPolytope> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = local.aabb();
    let span = hi - lo;
    let mut seeds: Vec<Vec3> = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while seeds.len() < count && attempts < count * 10_000 {
        attempts += 1;
        let p = Vec3::new(
            lo.x + rng.gen::<f64>() * span.x,
            lo.y + rng.gen::<f64>() * span.y,
            lo.z + rng.gen::<f64>() * span.z,
        );
        if local.contains(&p, 0.0) {
            seeds.push(p);
        }
    }
    // degeneracy tie-breaking: deterministic sub-nanometer jitter
    for (i, s) in seeds.iter_mut().enumerate() {
        for axis in 0..3 {
            let h = stable_hash(&[
                &seed.to_le_bytes(),
                &(i as u64).to_le_bytes(),
                &[axis as u8],
            ]);
            s[axis] += ((h as f64 / u64::MAX as f64) - 0.5) * 2.0e-9;
        }
    }

    let mut cells = Vec::with_capacity(seeds.len());
    'outer: for (i, si) in seeds.iter().enumerate() {
        let mut cell = local.clone();
        for (j, sj) in seeds.iter().enumerate() {
            if i == j {
                continue;
            }
            let n = (sj - si).normalize();
            let d = n.dot(&((si + sj) / 2.0));
            match cell.clip_halfspace(n, d) {
                Some(next) => cell = next,
                None => continue 'outer,
            }
        }
        if cell.volume() > 0.0 {
            cells.push(cell);
        }
    }
    cells
}

fn grid_cells(local: &ConvexPolytope, cell_target: f64) -> Vec<ConvexPolytope> {
    let (lo, hi) = local.aabb();
    let span = hi - lo;
    let edge = cell_target.cbrt();
    let counts = [
        ((span.x / edge).round() as usize).max(1),
        ((span.y / edge).round() as usize).max(1),
        ((span.z / edge).round() as usize).max(1),
    ];
    let mut cells = Vec::new();
    for ix in 0..counts[0] {
        for iy in 0..counts[1] {
            for iz in 0..counts[2] {
                let idx = [ix, iy, iz];
                let mut cell = local.clone();
                let mut alive = true;
                for axis in 0..3 {
                    let step = span[axis] / counts[axis] as f64;
                    let a = lo[axis] + step * idx[axis] as f64;
                    let b = a + step;
                    let mut n_lo = Vec3::zeros();
                    n_lo[axis] = -1.0;
                    let mut n_hi = Vec3::zeros();
                    n_hi[axis] = 1.0;
                    // keep a <= x_axis <= b
                    cell = match cell
                        .clip_halfspace(n_lo, -a)
                        .and_then(|c| c.clip_halfspace(n_hi, b))
                    {
                        Some(c) => c,
                        None => {
                            alive = false;
                            break;
                        }
                    };
                }
                if alive && cell.volume() > 1e-12 {
                    cells.push(cell);
                }
            }
        }
    }
    cells
}

fn planar_cells(local: &ConvexPolytope, count: usize, axis: usize) -> Vec<ConvexPolytope> {
    let (lo, hi) = local.aabb();
    let span = hi[axis] - lo[axis];
    let step = span / count as f64;
    let mut cells = Vec::new();
    for i in 0..count {
        let a = lo[axis] + step * i as f64;
        let b = a + step;
        let mut n_lo = Vec3::zeros();
        n_lo[axis] = -1.0;
        let mut n_hi = Vec3::zeros();
        n_hi[axis] = 1.0;
        let slab = local
            .clip_halfspace(n_lo, -a)
            .and_then(|c| c.clip_halfspace(n_hi, b));
        if let Some(c) = slab {
            if c.volume() > 1e-12 {
                cells.push(c);
            }
        }
    }
    cells
}
