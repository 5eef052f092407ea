//! Sequential-impulse constraint solver.
//!
//! Each step builds velocity rows for intact bonds, intact anchors, and the
//! frame's contact manifolds, warm-starts them from the previous step, then
//! runs a fixed iteration count in a fixed order: bonds, anchors, contacts.
//! Positional drift is fed back through Baumgarte bias. The accumulated
//! impulse on a bond or anchor over the whole step is its breakage measure.

use std::collections::HashMap;

use nalgebra::{Matrix6, Vector6};
use rubble_geom::{Mat3, Quat, Vec3};

use crate::body::Body;
use crate::contact::ContactPoint;

type Mat6 = Matrix6<f64>;
type Vec6 = Vector6<f64>;

/// Penetration allowed before the positional bias pushes back, in meters.
/// Also the tunneling tolerance the world promises to hold.
pub const CONTACT_SLOP: f64 = 0.01;
/// Baumgarte positional feedback factor.
pub const BAUMGARTE: f64 = 0.2;
/// Angular bond impulses convert to the linear threshold through this moment
/// arm, mirroring how anchor angular thresholds are derived from linear ones.
pub const BOND_LEVER_ARM: f64 = 0.5;
/// Incoming normal speed below which restitution is ignored.
const RESTITUTION_THRESHOLD: f64 = 1.0;
/// Weld rows are swept this many times per solver iteration. Bond networks
/// run much deeper than contact stacks, and at the default iteration count a
/// single sweep per iteration leaves enough residual to make large welded
/// structures ring instead of settling.
const WELD_SWEEPS: u32 = 4;

#[derive(Debug, Clone)]
pub(crate) struct BondRuntime {
    pub id: u32,
    pub a: usize,
    pub b: usize,
    pub local_a: Vec3,
    pub local_b: Vec3,
    /// Orientation of b relative to a at rest.
    pub rest_rel: Quat,
    pub break_impulse: f64,
    pub intact: bool,
    pub warm_lin: Vec3,
    pub warm_ang: Vec3,
}

#[derive(Debug, Clone)]
pub(crate) struct AnchorRuntime {
    pub id: u32,
    pub body: usize,
    pub local_point: Vec3,
    /// Anchor point at rest; the live target adds the terrain offset.
    pub base_world: Vec3,
    pub rest_orientation: Quat,
    pub lin_threshold: f64,
    pub ang_threshold: f64,
    pub compliance: f64,
    pub intact: bool,
    pub warm_lin: Vec3,
    pub warm_ang: Vec3,
}

/// Identifies one contact point across frames so its impulse can warm-start
/// the next step. Terrain contacts key on the piece vertex; pair contacts on
/// the face pair plus the clip ordinal.
pub(crate) type FeatureKey = (usize, usize, u32, u32, u32);

pub(crate) struct ContactRow {
    /// Body on the negative side of the normal; `None` is the terrain.
    pub a: Option<usize>,
    pub b: usize,
    pub feature: FeatureKey,
    pub normal: Vec3,
    pub t1: Vec3,
    pub t2: Vec3,
    pub point: Vec3,
    pub target_vn: f64,
    pub mass_n: f64,
    pub mass_t1: f64,
    pub mass_t2: f64,
    pub jn: f64,
    pub jt1: f64,
    pub jt2: f64,
}

/// A weld row couples the linear constraint at the attachment points with the
/// relative-orientation constraint in one 6x6 block; solving them separately
/// leaves the lever-arm cross terms to Gauss-Seidel and long bond chains ring
/// at practical iteration counts.
struct BondRow {
    slot: usize,
    a: usize,
    b: usize,
    ra: Vec3,
    rb: Vec3,
    k_inv: Mat6,
    bias: Vec6,
    j_lin: Vec3,
    j_ang: Vec3,
}

struct AnchorRow {
    slot: usize,
    body: usize,
    r: Vec3,
    target_velocity: Vec3,
    k_inv: Mat6,
    bias: Vec6,
    j_lin: Vec3,
    j_ang: Vec3,
}

pub(crate) struct SolverParams {
    pub dt: f64,
    pub iterations: u32,
    pub friction: f64,
    pub restitution: f64,
    pub terrain_velocity: Vec3,
}

pub(crate) struct StepOutcome {
    pub broken_bonds: Vec<u32>,
    pub broken_anchors: Vec<u32>,
    pub warm_contacts: HashMap<FeatureKey, (f64, f64, f64)>,
}

fn skew(v: Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

fn invert6(k: Mat6) -> Mat6 {
    k.try_inverse().unwrap_or_else(Mat6::zeros)
}

fn assemble6(ll: Mat3, lt: Mat3, tl: Mat3, tt: Mat3) -> Mat6 {
    let mut k = Mat6::zeros();
    k.fixed_view_mut::<3, 3>(0, 0).copy_from(&ll);
    k.fixed_view_mut::<3, 3>(0, 3).copy_from(&lt);
    k.fixed_view_mut::<3, 3>(3, 0).copy_from(&tl);
    k.fixed_view_mut::<3, 3>(3, 3).copy_from(&tt);
    k
}

fn stack6(top: Vec3, bottom: Vec3) -> Vec6 {
    Vec6::new(top.x, top.y, top.z, bottom.x, bottom.y, bottom.z)
}

fn split6(v: Vec6) -> (Vec3, Vec3) {
    (Vec3::new(v[0], v[1], v[2]), Vec3::new(v[3], v[4], v[5]))
}

/// Response of the relative attachment-point velocity and relative angular
/// velocity to an impulse/torque pair applied at a bond's attachments.
fn weld_k(bodies: &[Body], a: usize, b: usize, ra: Vec3, rb: Vec3) -> Mat6 {
    let (ba, bb) = (&bodies[a], &bodies[b]);
    let sa = skew(ra);
    let sb = skew(rb);
    let ll = Mat3::identity() * (ba.inv_mass + bb.inv_mass)
        - sa * ba.inv_inertia_world * sa
        - sb * bb.inv_inertia_world * sb;
    let lt = -sa * ba.inv_inertia_world - sb * bb.inv_inertia_world;
    let tl = ba.inv_inertia_world * sa + bb.inv_inertia_world * sb;
    let tt = ba.inv_inertia_world + bb.inv_inertia_world;
    assemble6(ll, lt, tl, tt)
}

fn anchor_k(body: &Body, r: Vec3, soft: f64) -> Mat6 {
    let sr = skew(r);
    let ll = Mat3::identity() * (body.inv_mass + soft) - sr * body.inv_inertia_world * sr;
    let lt = -sr * body.inv_inertia_world;
    let tl = body.inv_inertia_world * sr;
    let tt = body.inv_inertia_world + Mat3::identity() * soft;
    assemble6(ll, lt, tl, tt)
}

/// `+j` at b's attachment plus `+tau` on b, with the opposite on a.
fn apply_weld_impulse(bodies: &mut [Body], row_a: usize, row_b: usize, ra: Vec3, rb: Vec3, j: Vec3, tau: Vec3) {
    let a = &mut bodies[row_a];
    a.velocity -= j * a.inv_mass;
    let kick_a = a.inv_inertia_world * (ra.cross(&j) + tau);
    a.angular_velocity -= kick_a;
    let b = &mut bodies[row_b];
    b.velocity += j * b.inv_mass;
    let kick_b = b.inv_inertia_world * (rb.cross(&j) + tau);
    b.angular_velocity += kick_b;
}

fn apply_anchor_impulse(bodies: &mut [Body], body: usize, r: Vec3, j: Vec3, tau: Vec3) {
    let b = &mut bodies[body];
    b.velocity += j * b.inv_mass;
    let kick = b.inv_inertia_world * (r.cross(&j) + tau);
    b.angular_velocity += kick;
}

/// Deterministic tangent basis for a contact normal.
fn tangent_basis(n: Vec3) -> (Vec3, Vec3) {
    let helper = if n.x.abs() < 0.57 {
        Vec3::x()
    } else {
        Vec3::y()
    };
    let t1 = n.cross(&helper).normalize();
    let t2 = n.cross(&t1);
    (t1, t2)
}

pub(crate) fn contact_row(
    bodies: &[Body],
    a: Option<usize>,
    b: usize,
    normal: Vec3,
    cp: &ContactPoint,
    feature: FeatureKey,
    params: &SolverParams,
) -> ContactRow {
    let (t1, t2) = tangent_basis(normal);
    let body_b = &bodies[b];
    let rb = cp.point - body_b.position;

    let mass_along = |dir: &Vec3| -> f64 {
        let mut k = body_b.inv_mass;
        let rbn = rb.cross(dir);
        k += (body_b.inv_inertia_world * rbn).dot(&rbn);
        if let Some(ai) = a {
            let body_a = &bodies[ai];
            let ra = cp.point - body_a.position;
            let ran = ra.cross(dir);
            k += body_a.inv_mass + (body_a.inv_inertia_world * ran).dot(&ran);
        }
        1.0 / k
    };

    let va = match a {
        Some(ai) => bodies[ai].point_velocity(cp.point),
        None => params.terrain_velocity,
    };
    let vn = normal.dot(&(body_b.point_velocity(cp.point) - va));

    let mut target_vn = if cp.depth > CONTACT_SLOP {
        BAUMGARTE / params.dt * (cp.depth - CONTACT_SLOP)
    } else if cp.depth >= 0.0 {
        0.0
    } else {
        cp.depth / params.dt
    };
    if params.restitution > 0.0 && vn < -RESTITUTION_THRESHOLD {
        target_vn = target_vn.max(-params.restitution * vn);
    }

    ContactRow {
        a,
        b,
        feature,
        normal,
        t1,
        t2,
        point: cp.point,
        target_vn,
        mass_n: mass_along(&normal),
        mass_t1: mass_along(&t1),
        mass_t2: mass_along(&t2),
        jn: 0.0,
        jt1: 0.0,
        jt2: 0.0,
    }
}

fn apply_pair_impulse(bodies: &mut [Body], a: usize, b: usize, at: Vec3, j: Vec3) {
    let pa = bodies[a].position;
    bodies[a].velocity -= j * bodies[a].inv_mass;
    let kick = bodies[a].inv_inertia_world * (at - pa).cross(&j);
    bodies[a].angular_velocity -= kick;
    bodies[b].apply_impulse(j, at);
}

pub(crate) fn solve(
    bodies: &mut [Body],
    bonds: &mut [BondRuntime],
    anchors: &mut [AnchorRuntime],
    mut contacts: Vec<ContactRow>,
    warm_contacts: &HashMap<FeatureKey, (f64, f64, f64)>,
    terrain_offset: Vec3,
    params: &SolverParams,
) -> StepOutcome {
    let beta = BAUMGARTE / params.dt;

    let mut bond_rows: Vec<BondRow> = Vec::new();
    for (slot, bond) in bonds.iter().enumerate() {
        if !bond.intact {
            continue;
        }
        let (ba, bb) = (&bodies[bond.a], &bodies[bond.b]);
        let pa = ba.orientation * bond.local_a + ba.position;
        let pb = bb.orientation * bond.local_b + bb.position;
        let ra = pa - ba.position;
        let rb = pb - bb.position;
        let rel = (ba.orientation * bond.rest_rel).rotation_to(&bb.orientation);
        bond_rows.push(BondRow {
            slot,
            a: bond.a,
            b: bond.b,
            ra,
            rb,
            k_inv: invert6(weld_k(bodies, bond.a, bond.b, ra, rb)),
            bias: stack6((pb - pa) * beta, rel.scaled_axis() * beta),
            j_lin: Vec3::zeros(),
            j_ang: Vec3::zeros(),
        });
    }

    let mut anchor_rows: Vec<AnchorRow> = Vec::new();
    for (slot, anchor) in anchors.iter().enumerate() {
        if !anchor.intact {
            continue;
        }
        let body = &bodies[anchor.body];
        let p = body.orientation * anchor.local_point + body.position;
        let target = anchor.base_world + terrain_offset;
        let r = p - body.position;
        let soft = anchor.compliance / (params.dt * params.dt);
        let rel = anchor.rest_orientation.rotation_to(&body.orientation);
        anchor_rows.push(AnchorRow {
            slot,
            body: anchor.body,
            r,
            target_velocity: params.terrain_velocity,
            k_inv: invert6(anchor_k(body, r, soft)),
            bias: stack6((p - target) * beta, rel.scaled_axis() * beta),
            j_lin: Vec3::zeros(),
            j_ang: Vec3::zeros(),
        });
    }

    // warm start: replay last step's impulses before iterating
    for row in bond_rows.iter_mut() {
        let bond = &bonds[row.slot];
        apply_weld_impulse(
            bodies,
            row.a,
            row.b,
            row.ra,
            row.rb,
            bond.warm_lin,
            bond.warm_ang,
        );
        row.j_lin = bond.warm_lin;
        row.j_ang = bond.warm_ang;
    }
    for row in anchor_rows.iter_mut() {
        let anchor = &anchors[row.slot];
        apply_anchor_impulse(bodies, row.body, row.r, anchor.warm_lin, anchor.warm_ang);
        row.j_lin = anchor.warm_lin;
        row.j_ang = anchor.warm_ang;
    }
    for row in contacts.iter_mut() {
        if let Some(&(jn, jt1, jt2)) = warm_contacts.get(&row.feature) {
            let j = row.normal * jn + row.t1 * jt1 + row.t2 * jt2;
            match row.a {
                Some(a) => apply_pair_impulse(bodies, a, row.b, row.point, j),
                None => bodies[row.b].apply_impulse(j, row.point),
            }
            row.jn = jn;
            row.jt1 = jt1;
            row.jt2 = jt2;
        }
    }

    for _ in 0..params.iterations {
        for _ in 0..WELD_SWEEPS {
            for row in bond_rows.iter_mut() {
                let (ba, bb) = (&bodies[row.a], &bodies[row.b]);
                let u = bb.point_velocity(bb.position + row.rb)
                    - ba.point_velocity(ba.position + row.ra);
                let w = bb.angular_velocity - ba.angular_velocity;
                let x = row.k_inv * (-stack6(u, w) - row.bias);
                let (j, tau) = split6(x);
                apply_weld_impulse(bodies, row.a, row.b, row.ra, row.rb, j, tau);
                row.j_lin += j;
                row.j_ang += tau;
            }

            for row in anchor_rows.iter_mut() {
                let body = &bodies[row.body];
                let u = body.point_velocity(body.position + row.r) - row.target_velocity;
                let w = body.angular_velocity;
                let x = row.k_inv * (-stack6(u, w) - row.bias);
                let (j, tau) = split6(x);
                apply_anchor_impulse(bodies, row.body, row.r, j, tau);
                row.j_lin += j;
                row.j_ang += tau;
            }
        }

        for row in contacts.iter_mut() {
            let va = match row.a {
                Some(a) => bodies[a].point_velocity(row.point),
                None => params.terrain_velocity,
            };
            let v_rel = bodies[row.b].point_velocity(row.point) - va;

            let vn = row.normal.dot(&v_rel);
            let new_jn = (row.jn + (row.target_vn - vn) * row.mass_n).max(0.0);
            let dn = new_jn - row.jn;
            row.jn = new_jn;

            let vt1 = row.t1.dot(&v_rel);
            let vt2 = row.t2.dot(&v_rel);
            let limit = params.friction * row.jn;
            let new_jt1 = (row.jt1 - vt1 * row.mass_t1).clamp(-limit, limit);
            let new_jt2 = (row.jt2 - vt2 * row.mass_t2).clamp(-limit, limit);
            let d1 = new_jt1 - row.jt1;
            let d2 = new_jt2 - row.jt2;
            row.jt1 = new_jt1;
            row.jt2 = new_jt2;

            let j = row.normal * dn + row.t1 * d1 + row.t2 * d2;
            match row.a {
                Some(a) => apply_pair_impulse(bodies, a, row.b, row.point, j),
                None => bodies[row.b].apply_impulse(j, row.point),
            }
        }
    }

    let mut broken_bonds = Vec::new();
    for row in bond_rows.iter() {
        let bond = &mut bonds[row.slot];
        let snapped = row.j_lin.norm() > bond.break_impulse
            || row.j_ang.norm() > bond.break_impulse * BOND_LEVER_ARM;
        if snapped {
            bond.intact = false;
            bond.warm_lin = Vec3::zeros();
            bond.warm_ang = Vec3::zeros();
            broken_bonds.push(bond.id);
        } else {
            bond.warm_lin = row.j_lin;
            bond.warm_ang = row.j_ang;
        }
    }

    let mut broken_anchors = Vec::new();
    for row in anchor_rows.iter() {
        let anchor = &mut anchors[row.slot];
        let snapped = row.j_lin.norm() > anchor.lin_threshold
            || row.j_ang.norm() > anchor.ang_threshold;
        if snapped {
            anchor.intact = false;
            anchor.warm_lin = Vec3::zeros();
            anchor.warm_ang = Vec3::zeros();
            broken_anchors.push(anchor.id);
        } else {
            anchor.warm_lin = row.j_lin;
            anchor.warm_ang = row.j_ang;
        }
    }

    let mut warm = HashMap::with_capacity(contacts.len());
    for row in contacts.iter() {
        if row.jn != 0.0 || row.jt1 != 0.0 || row.jt2 != 0.0 {
            warm.insert(row.feature, (row.jn, row.jt1, row.jt2));
        }
    }

    StepOutcome {
        broken_bonds,
        broken_anchors,
        warm_contacts: warm,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tangent_basis_is_orthonormal() {
        for n in [
            Vec3::z(),
            Vec3::x(),
            Vec3::new(0.6, -0.4, 0.69282).normalize(),
        ] {
            let (t1, t2) = tangent_basis(n);
            assert!((t1.norm() - 1.0).abs() < 1e-12);
            assert!((t2.norm() - 1.0).abs() < 1e-12);
            assert!(t1.dot(&n).abs() < 1e-12);
            assert!(t2.dot(&n).abs() < 1e-12);
            assert!(t1.dot(&t2).abs() < 1e-12);
        }
    }

    #[test]
    fn skew_matrix_reproduces_cross_product() {
        let a = Vec3::new(1.0, -2.0, 0.5);
        let b = Vec3::new(0.3, 4.0, -1.0);
        assert!((skew(a) * b - a.cross(&b)).norm() < 1e-12);
    }
}
