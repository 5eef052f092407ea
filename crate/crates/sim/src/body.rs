//! Rigid body state, both the public per-frame snapshot and the internal
//! integrator representation.

use nalgebra::Quaternion;
use rubble_geom::fracture::FracturePiece;
use rubble_geom::{Mat3, Quat, Vec3};
use serde::{Deserialize, Serialize};

/// Snapshot of one piece inside a frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidBodyState {
    pub piece_id: u64,
    pub position: [f64; 3],
    /// Unit quaternion, stored w, x, y, z.
    pub orientation: [f64; 4],
    pub linear_velocity: [f64; 3],
    pub angular_velocity: [f64; 3],
    pub asleep: bool,
}

#[derive(Debug, Clone)]
pub(crate) struct Body {
    pub piece_id: u64,
    pub inv_mass: f64,
    /// Inverse principal moments, in the body frame.
    pub inv_inertia_local: Vec3,
    pub mass: f64,
    pub inertia_local: Vec3,
    pub position: Vec3,
    pub orientation: Quat,
    pub velocity: Vec3,
    pub angular_velocity: Vec3,
    pub rest_position: Vec3,
    pub rest_orientation: Quat,
    pub asleep: bool,
    pub still_frames: u32,
    /// Refreshed at the top of each step.
    pub inv_inertia_world: Mat3,
}

impl Body {
    pub fn from_piece(piece: &FracturePiece) -> Self {
        let inv_inertia_local = Vec3::new(
            1.0 / piece.inertia.x,
            1.0 / piece.inertia.y,
            1.0 / piece.inertia.z,
        );
        let mut body = Self {
            piece_id: piece.id,
            inv_mass: 1.0 / piece.mass,
            inv_inertia_local,
            mass: piece.mass,
            inertia_local: piece.inertia,
            position: piece.rest_pose.position,
            orientation: piece.rest_pose.orientation,
            velocity: Vec3::zeros(),
            angular_velocity: Vec3::zeros(),
            rest_position: piece.rest_pose.position,
            rest_orientation: piece.rest_pose.orientation,
            asleep: false,
            still_frames: 0,
            inv_inertia_world: Mat3::zeros(),
        };
        body.refresh_world_inertia();
        body
    }

    pub fn refresh_world_inertia(&mut self) {
        let r = self.orientation.to_rotation_matrix();
        let m = r.matrix();
        self.inv_inertia_world =
            m * Mat3::from_diagonal(&self.inv_inertia_local) * m.transpose();
    }

    /// Velocity of the world point `p` carried by this body.
    pub fn point_velocity(&self, p: Vec3) -> Vec3 {
        self.velocity + self.angular_velocity.cross(&(p - self.position))
    }

    pub fn apply_impulse(&mut self, j: Vec3, at: Vec3) {
        self.velocity += j * self.inv_mass;
        self.angular_velocity += self.inv_inertia_world * (at - self.position).cross(&j);
    }

    pub fn apply_angular_impulse(&mut self, j: Vec3) {
        self.angular_velocity += self.inv_inertia_world * j;
    }

    pub fn integrate(&mut self, dt: f64) {
        self.position += self.velocity * dt;
        let w = self.angular_velocity;
        let q = self.orientation.quaternion();
        let dq = Quaternion::new(0.0, w.x, w.y, w.z) * q * 0.5;
        self.orientation = Quat::from_quaternion(q + dq * dt);
    }

    pub fn kinetic_energy(&self) -> f64 {
        let r = self.orientation.to_rotation_matrix();
        let w_local = r.inverse_transform_vector(&self.angular_velocity);
        let rot = w_local.component_mul(&self.inertia_local).dot(&w_local);
        0.5 * (self.mass * self.velocity.norm_squared() + rot)
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().all(|v| v.is_finite())
            && self.velocity.iter().all(|v| v.is_finite())
            && self.angular_velocity.iter().all(|v| v.is_finite())
            && self.orientation.quaternion().coords.iter().all(|v| v.is_finite())
    }

    pub fn snapshot(&self) -> RigidBodyState {
        let q = self.orientation.quaternion();
        RigidBodyState {
            piece_id: self.piece_id,
            position: [self.position.x, self.position.y, self.position.z],
            orientation: [q.w, q.i, q.j, q.k],
            linear_velocity: [self.velocity.x, self.velocity.y, self.velocity.z],
            angular_velocity: [
                self.angular_velocity.x,
                self.angular_velocity.y,
                self.angular_velocity.z,
            ],
            asleep: self.asleep,
        }
    }
}
