#![allow(dead_code)]

use rubble_anchor::AnchorConstraint;
use rubble_geom::bond::{Bond, BondGraph};
use rubble_geom::fracture::{FracturePiece, GeometryCollection};
use rubble_geom::polytope::ConvexPolytope;
use rubble_geom::solid::Pose;
use rubble_geom::Vec3;
use rubble_sim::TerrainDrive;

pub fn box_piece(id: u64, size: Vec3, com: Vec3, density: f64, material: &str) -> FracturePiece {
    let volume = size.x * size.y * size.z;
    let mass = volume * density;
    let inertia = Vec3::new(
        mass / 12.0 * (size.y * size.y + size.z * size.z),
        mass / 12.0 * (size.x * size.x + size.z * size.z),
        mass / 12.0 * (size.x * size.x + size.y * size.y),
    );
    FracturePiece {
        id,
        polytope: ConvexPolytope::from_box(size).translated(-size / 2.0),
        material_id: material.into(),
        mass,
        inertia,
        source_solid: "test".into(),
        rest_pose: Pose::translation(com),
        volume,
    }
}

pub fn collection_of(pieces: Vec<FracturePiece>, bonds: Vec<Bond>) -> GeometryCollection {
    GeometryCollection {
        pieces,
        bonds: BondGraph { edges: bonds },
        rng_seed: 0,
    }
}

pub fn bond_between(a: u64, b: u64, area: f64, break_impulse: f64) -> Bond {
    Bond {
        piece_a: a,
        piece_b: b,
        contact_area: area,
        break_impulse,
    }
}

pub fn anchor_at(id: usize, piece: u64, pos: Vec3, lin: f64, ang: f64) -> AnchorConstraint {
    AnchorConstraint {
        anchor_id: id,
        piece_id: piece,
        position: [pos.x, pos.y, pos.z],
        linear_break_threshold: lin,
        angular_break_threshold: ang,
        compliance: 1e-7,
    }
}

pub fn still_drive(fps: u32, frames: usize) -> TerrainDrive {
    TerrainDrive::still(fps as f64, frames)
}

/// Terrain jumps by `amplitude` in x at the second sample and stays there.
pub fn step_drive_x(fps: u32, frames: usize, amplitude: f64) -> TerrainDrive {
    let mut drive = TerrainDrive::still(fps as f64, frames);
    for i in 1..frames {
        drive.series.x[i] = amplitude;
    }
    drive
}

/// Triangle-wave shaking in x at `freq` Hz: constant terrain speed 4*amp*freq
/// with a sharp reversal at every peak. Keep the vertices on the sample grid
/// (freq such that 4*freq divides fps) so the reversal lands in a single
/// frame at any supported rate.
pub fn triangle_drive_x(fps: u32, seconds: f64, amplitude: f64, freq: f64) -> TerrainDrive {
    let n = (seconds * fps as f64).round() as usize;
    let mut drive = TerrainDrive::still(fps as f64, n);
    for i in 0..n {
        let t = i as f64 / fps as f64;
        let phase = (freq * t).fract();
        let tri = if phase < 0.25 {
            4.0 * phase
        } else if phase < 0.75 {
            2.0 - 4.0 * phase
        } else {
            4.0 * phase - 4.0
        };
        drive.series.x[i] = amplitude * tri;
    }
    drive
}

/// Sinusoidal shaking in x and z at `freq` Hz.
pub fn sine_drive(fps: u32, seconds: f64, amp_x: f64, amp_z: f64, freq: f64) -> TerrainDrive {
    let n = (seconds * fps as f64).round() as usize;
    let mut drive = TerrainDrive::still(fps as f64, n);
    for i in 0..n {
        let t = i as f64 / fps as f64;
        let s = (2.0 * std::f64::consts::PI * freq * t).sin();
        drive.series.x[i] = amp_x * s;
        drive.series.z[i] = amp_z * s;
    }
    drive
}
