//! Run configuration and the kinematic terrain drive.

use rubble_geom::Vec3;
use rubble_seismic::DisplacementSeries;
use serde::{Deserialize, Serialize};

use crate::error::SimError;

pub const SUPPORTED_FPS: [u32; 3] = [40, 90, 240];

/// Ground motion for the run. Each drive sample is the terrain offset for one
/// simulation frame, so the series must be resampled to the frame rate before
/// the world is built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerrainDrive {
    pub series: DisplacementSeries,
}

impl TerrainDrive {
    pub fn new(series: DisplacementSeries) -> Self {
        Self { series }
    }

    /// A drive of `len` zero samples: the terrain never moves.
    pub fn still(sample_rate: f64, len: usize) -> Self {
        Self {
            series: DisplacementSeries {
                sample_rate,
                t0: chrono::DateTime::UNIX_EPOCH,
                x: vec![0.0; len],
                y: vec![0.0; len],
                z: vec![0.0; len],
            },
        }
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    /// Terrain offset at frame `i`. Clamps to the last sample so a settling
    /// tail can run past the end of the recording.
    pub fn offset(&self, i: usize) -> Vec3 {
        let k = i.min(self.len().saturating_sub(1));
        Vec3::new(self.series.x[k], self.series.y[k], self.series.z[k])
    }

    /// Scale every sample, for amplitude sweeps.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for axis in [&mut out.series.x, &mut out.series.y, &mut out.series.z] {
            for v in axis.iter_mut() {
                *v *= factor;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulationConfig {
    /// Frames per second; one of 40, 90, 240.
    pub fps: u32,
    /// Simulated length in seconds. The run produces `duration * fps` frames.
    pub duration: f64,
    /// Downward gravity magnitude, m/s^2.
    pub gravity: f64,
    /// Constraint solver iterations per step.
    pub iterations: u32,
    pub friction: f64,
    pub restitution: f64,
    /// Allow bodies to fall asleep when motionless. Keep off while the ground
    /// is shaking; useful for settling phases.
    pub sleeping: bool,
    pub rng_seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            fps: 40,
            duration: 1.0,
            gravity: 9.81,
            iterations: 16,
            friction: 0.6,
            restitution: 0.0,
            sleeping: false,
            rng_seed: 0,
        }
    }
}

impl SimulationConfig {
    pub fn dt(&self) -> f64 {
        1.0 / self.fps as f64
    }

    pub fn frame_count(&self) -> usize {
        (self.duration * self.fps as f64).round() as usize
    }

    pub fn validate(&self, drive: &TerrainDrive) -> Result<(), SimError> {
        if !SUPPORTED_FPS.contains(&self.fps) {
            return Err(SimError::UnsupportedFps(self.fps));
        }
        if self.iterations < 4 {
            return Err(SimError::TooFewIterations(self.iterations));
        }
        let rate = drive.series.sample_rate;
        if (rate - self.fps as f64).abs() > 1e-9 {
            return Err(SimError::DriveRateMismatch {
                drive: rate,
                fps: self.fps,
            });
        }
        let needed = self.frame_count();
        if drive.len() < needed {
            return Err(SimError::DriveTooShort {
                needed,
                len: drive.len(),
            });
        }
        Ok(())
    }
}
