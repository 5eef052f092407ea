//! World assembly and the fixed-timestep loop.
//!
//! A world owns every mutable piece of simulation state, so one run is a
//! plain sequence of `step` calls with no hidden globals. All iteration is in
//! fixed index order and the only map lookups are keyed, which keeps repeat
//! runs bitwise identical.

use std::collections::{HashMap, HashSet};

use rubble_anchor::AnchorConstraint;
use rubble_geom::fracture::GeometryCollection;
use rubble_geom::Vec3;

use crate::body::{Body, RigidBodyState};
use crate::config::{SimulationConfig, TerrainDrive};
use crate::contact::{self, CollisionShape, ShapeInstance};
use crate::error::SimError;
use crate::log::{FrameSink, RunSummary, SimulationFrame};
use crate::solver::{
    self, AnchorRuntime, BondRuntime, ContactRow, FeatureKey, SolverParams, CONTACT_SLOP,
};
use crate::stats::DISPLACEMENT_THRESHOLD;

/// Contact search reach grows with closing speed by this factor so fast
/// bodies meet their contact rows before crossing a surface.
const MARGIN_VELOCITY_FACTOR: f64 = 1.5;
/// A body sleeps after half a second below these speeds and wakes as soon as
/// the solver pushes it back above them; matching the two cutoffs keeps
/// residual solver noise from flapping a body in and out of sleep.
const SLEEP_LINEAR: f64 = 5e-3;
const SLEEP_ANGULAR: f64 = 1e-2;

pub struct WorldState {
    config: SimulationConfig,
    drive: TerrainDrive,
    pieces: GeometryCollection,
    bodies: Vec<Body>,
    shapes: Vec<CollisionShape>,
    bonds: Vec<BondRuntime>,
    anchors: Vec<AnchorRuntime>,
    warm_contacts: HashMap<FeatureKey, (f64, f64, f64)>,
    frame: u32,
    terrain_offset: Vec3,
    terrain_velocity: Vec3,
}

/// Build a world from fractured buildings, their anchor constraints, and a
/// terrain drive already resampled to the simulation rate. Multiple building
/// collections are merged, which renumbers their piece ids; anchors must
/// reference the merged ids.
pub fn init_world(
    buildings: Vec<GeometryCollection>,
    anchors: &[AnchorConstraint],
    terrain: TerrainDrive,
    config: SimulationConfig,
) -> Result<WorldState, SimError> {
    config.validate(&terrain)?;
    let seed = config.rng_seed;
    let pieces = GeometryCollection::merge(buildings, seed);

    let mut index_of = HashMap::with_capacity(pieces.pieces.len());
    for (i, piece) in pieces.pieces.iter().enumerate() {
        if index_of.insert(piece.id, i).is_some() {
            return Err(SimError::DuplicatePiece(piece.id));
        }
    }

    let bodies: Vec<Body> = pieces
        .pieces
        .iter()
        .map(Body::from_piece)
        .collect();
    let shapes: Vec<CollisionShape> = pieces
        .pieces
        .iter()
        .map(|p| CollisionShape::new(&p.polytope))
        .collect();

    let mut bonds = Vec::with_capacity(pieces.bonds.len());
    for (index, bond) in pieces.bonds.edges.iter().enumerate() {
        let a = *index_of
            .get(&bond.piece_a)
            .ok_or(SimError::DanglingBond {
                index,
                piece_id: bond.piece_a,
            })?;
        let b = *index_of
            .get(&bond.piece_b)
            .ok_or(SimError::DanglingBond {
                index,
                piece_id: bond.piece_b,
            })?;
        let (ba, bb) = (&bodies[a], &bodies[b]);
        let mid = (ba.rest_position + bb.rest_position) * 0.5;
        bonds.push(BondRuntime {
            id: index as u32,
            a,
            b,
            local_a: ba.rest_orientation.inverse() * (mid - ba.rest_position),
            local_b: bb.rest_orientation.inverse() * (mid - bb.rest_position),
            rest_rel: ba.rest_orientation.inverse() * bb.rest_orientation,
            break_impulse: bond.break_impulse,
            intact: true,
            warm_lin: Vec3::zeros(),
            warm_ang: Vec3::zeros(),
        });
    }

    let mut anchor_runtimes = Vec::with_capacity(anchors.len());
    for anchor in anchors {
        let body = *index_of
            .get(&anchor.piece_id)
            .ok_or(SimError::DanglingAnchor {
                anchor_id: anchor.anchor_id,
                piece_id: anchor.piece_id,
            })?;
        let p = Vec3::new(anchor.position[0], anchor.position[1], anchor.position[2]);
        let rest = &bodies[body];
        anchor_runtimes.push(AnchorRuntime {
            id: anchor.anchor_id as u32,
            body,
            local_point: rest.rest_orientation.inverse() * (p - rest.rest_position),
            base_world: p,
            rest_orientation: rest.rest_orientation,
            lin_threshold: anchor.linear_break_threshold,
            ang_threshold: anchor.angular_break_threshold,
            compliance: anchor.compliance,
            intact: true,
            warm_lin: Vec3::zeros(),
            warm_ang: Vec3::zeros(),
        });
    }
    anchor_runtimes.sort_by_key(|a| a.id);

    let terrain_offset = if terrain.is_empty() {
        Vec3::zeros()
    } else {
        terrain.offset(0)
    };

    Ok(WorldState {
        config,
        drive: terrain,
        pieces,
        bodies,
        shapes,
        bonds,
        anchors: anchor_runtimes,
        warm_contacts: HashMap::new(),
        frame: 0,
        terrain_offset,
        terrain_velocity: Vec3::zeros(),
    })
}

impl WorldState {
    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    pub fn pieces(&self) -> &GeometryCollection {
        &self.pieces
    }

    pub fn frame(&self) -> u32 {
        self.frame
    }

    pub fn terrain_offset(&self) -> Vec3 {
        self.terrain_offset
    }

    pub fn piece_ids(&self) -> Vec<u64> {
        self.bodies.iter().map(|b| b.piece_id).collect()
    }

    pub fn body_states(&self) -> Vec<RigidBodyState> {
        self.bodies.iter().map(|b| b.snapshot()).collect()
    }

    pub fn kinetic_energy(&self) -> f64 {
        self.bodies.iter().map(|b| b.kinetic_energy()).sum()
    }

    pub fn intact_bond_count(&self) -> usize {
        self.bonds.iter().filter(|b| b.intact).count()
    }

    pub fn intact_anchor_count(&self) -> usize {
        self.anchors.iter().filter(|a| a.intact).count()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    pub fn anchor_count(&self) -> usize {
        self.anchors.len()
    }

    /// Count of bodies farther than the displacement threshold from rest.
    pub fn displaced_count(&self) -> usize {
        self.bodies
            .iter()
            .filter(|b| (b.position - b.rest_position).norm() > DISPLACEMENT_THRESHOLD)
            .count()
    }

    pub fn step(&mut self) -> Result<SimulationFrame, SimError> {
        let dt = self.config.dt();
        let fi = self.frame as usize;
        let offset = if self.drive.is_empty() {
            Vec3::zeros()
        } else {
            self.drive.offset(fi)
        };
        self.terrain_velocity = if fi == 0 {
            Vec3::zeros()
        } else {
            (offset - self.terrain_offset) / dt
        };
        self.terrain_offset = offset;

        let shaking = self.terrain_velocity.norm() > 1e-9;
        for body in self.bodies.iter_mut() {
            if self.config.sleeping && shaking {
                body.asleep = false;
                body.still_frames = 0;
            }
            if !body.asleep {
                body.velocity.z -= self.config.gravity * dt;
            }
            body.refresh_world_inertia();
        }

        let params = SolverParams {
            dt,
            iterations: self.config.iterations,
            friction: self.config.friction,
            restitution: self.config.restitution,
            terrain_velocity: self.terrain_velocity,
        };

        let instances: Vec<ShapeInstance> = self
            .bodies
            .iter()
            .enumerate()
            .map(|(i, b)| ShapeInstance::new(&self.shapes[i], b.position, b.orientation))
            .collect();
        let aabbs: Vec<(Vec3, Vec3)> =
            instances.iter().map(|s| contact::aabb_of(&s.verts)).collect();
        let speeds: Vec<f64> = self.bodies.iter().map(|b| b.velocity.norm()).collect();
        let terrain_speed = self.terrain_velocity.norm();

        let bonded: HashSet<(usize, usize)> = self
            .bonds
            .iter()
            .filter(|b| b.intact)
            .map(|b| (b.a.min(b.b), b.a.max(b.b)))
            .collect();

        let mut rows: Vec<ContactRow> = Vec::new();
        let terrain_z = self.terrain_offset.z;
        for (i, inst) in instances.iter().enumerate() {
            let margin =
                CONTACT_SLOP + MARGIN_VELOCITY_FACTOR * dt * (speeds[i] + terrain_speed);
            if aabbs[i].0.z - margin > terrain_z {
                continue;
            }
            for (vertex, cp) in contact::terrain_manifold(&inst.verts, terrain_z, margin) {
                let feature: FeatureKey = (usize::MAX, i, vertex as u32, 0, 0);
                rows.push(solver::contact_row(
                    &self.bodies,
                    None,
                    i,
                    Vec3::z(),
                    &cp,
                    feature,
                    &params,
                ));
            }
        }

        for i in 0..instances.len() {
            for j in (i + 1)..instances.len() {
                if bonded.contains(&(i, j)) {
                    continue;
                }
                let margin =
                    CONTACT_SLOP + MARGIN_VELOCITY_FACTOR * dt * (speeds[i] + speeds[j]);
                if !contact::aabbs_overlap(&aabbs[i], &aabbs[j], margin) {
                    continue;
                }
                let Some(manifold) = contact::contact_manifold(&instances[i], &instances[j], margin)
                else {
                    continue;
                };
                let face_code = manifold.ref_face * 2 + manifold.ref_is_a as u32;
                for (k, cp) in manifold.points.iter().enumerate() {
                    let feature: FeatureKey = (i, j, face_code, manifold.inc_face, k as u32);
                    rows.push(solver::contact_row(
                        &self.bodies,
                        Some(i),
                        j,
                        manifold.normal,
                        cp,
                        feature,
                        &params,
                    ));
                }
            }
        }

        let outcome = solver::solve(
            &mut self.bodies,
            &mut self.bonds,
            &mut self.anchors,
            rows,
            &self.warm_contacts,
            self.terrain_offset,
            &params,
        );
        self.warm_contacts = outcome.warm_contacts;

        let sleep_after = self.config.fps / 2;
        for body in self.bodies.iter_mut() {
            if self.config.sleeping {
                if body.asleep {
                    if body.velocity.norm() > SLEEP_LINEAR
                        || body.angular_velocity.norm() > SLEEP_ANGULAR
                    {
                        body.asleep = false;
                        body.still_frames = 0;
                    } else {
                        body.velocity = Vec3::zeros();
                        body.angular_velocity = Vec3::zeros();
                    }
                } else if body.velocity.norm() < SLEEP_LINEAR
                    && body.angular_velocity.norm() < SLEEP_ANGULAR
                {
                    body.still_frames += 1;
                    if body.still_frames >= sleep_after {
                        body.asleep = true;
                        body.velocity = Vec3::zeros();
                        body.angular_velocity = Vec3::zeros();
                    }
                } else {
                    body.still_frames = 0;
                }
            }
            if !body.asleep {
                body.integrate(dt);
            }
            if !body.is_finite() {
                return Err(SimError::Diverged { frame: self.frame });
            }
        }

        let frame = SimulationFrame {
            index: self.frame,
            time: (fi + 1) as f64 * dt,
            bodies: self.bodies.iter().map(|b| b.snapshot()).collect(),
            broken_bonds: outcome.broken_bonds,
            broken_anchors: outcome.broken_anchors,
        };
        self.frame += 1;
        Ok(frame)
    }
}

/// Step the world through its configured duration, feeding every frame to
/// `sink` and collecting the end-of-run summary.
pub fn run(world: &mut WorldState, sink: &mut dyn FrameSink) -> Result<RunSummary, SimError> {
    let total = world.config.frame_count();
    sink.begin(world)?;

    let mut broken_bonds = 0u32;
    let mut broken_anchors = 0u32;
    let mut per_frame = Vec::with_capacity(total);
    for _ in 0..total {
        let frame = world.step()?;
        broken_bonds += frame.broken_bonds.len() as u32;
        broken_anchors += frame.broken_anchors.len() as u32;
        per_frame.push(broken_bonds);
        sink.record(&frame)?;
    }
    sink.finish()?;

    Ok(RunSummary {
        frames: total as u32,
        fps: world.config.fps,
        duration: world.config.duration,
        body_count: world.bodies.len() as u32,
        bond_count: world.bonds.len() as u32,
        anchor_count: world.anchors.len() as u32,
        broken_bonds,
        broken_anchors,
        broken_bonds_per_frame: per_frame,
        final_kinetic_energy: world.kinetic_energy(),
        displaced_pieces: world.displaced_count() as u32,
    })
}
