//! Deterministic destruction simulation.
//!
//! A fractured building, its anchor constraints, and a terrain displacement
//! drive go in; a frame-by-frame log of rigid-body poses and breakage events
//! comes out. The terrain is a kinematic infinite plane translated by the
//! drive. Bonds weld touching pieces together and anchors weld grounded
//! pieces to the terrain; both snap when the impulse the solver pushes
//! through them in a single step exceeds their threshold, and a snapped
//! constraint never re-forms.
//!
//! Everything is fixed order and fixed timestep: the same scenario, seed,
//! and frame rate reproduce the same frame log byte for byte.

pub mod body;
pub mod config;
mod contact;
pub mod error;
pub mod log;
mod solver;
pub mod stats;
pub mod world;

pub use body::RigidBodyState;
pub use config::{SimulationConfig, TerrainDrive, SUPPORTED_FPS};
pub use error::SimError;
pub use log::{
    BinaryLogReader, BinaryLogWriter, FrameSink, LogHeader, MemoryLog, NullSink, RunSummary,
    SimulationFrame,
};
pub use solver::{BAUMGARTE, BOND_LEVER_ARM, CONTACT_SLOP};
pub use stats::{damage_stats, DamageReport, MaterialDamage, DISPLACEMENT_THRESHOLD};
pub use world::{init_world, run, WorldState};
