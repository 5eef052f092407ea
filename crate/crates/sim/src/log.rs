//! Frame capture: in-memory logs and the streamed binary format.
//!
//! The binary layout is little-endian throughout. A header names the bodies
//! once; each frame then stores poses quantized to f32 plus the ids of
//! constraints that broke during that frame. Velocities are not logged, so
//! frames read back from disk carry zero velocity.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::body::RigidBodyState;
use crate::error::SimError;
use crate::world::WorldState;

const MAGIC: &[u8; 8] = b"RBLLOG1\0";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationFrame {
    pub index: u32,
    pub time: f64,
    pub bodies: Vec<RigidBodyState>,
    /// Bond ids broken during this frame.
    pub broken_bonds: Vec<u32>,
    /// Anchor ids broken during this frame.
    pub broken_anchors: Vec<u32>,
}

/// Receives frames as the run produces them.
pub trait FrameSink {
    fn begin(&mut self, _world: &WorldState) -> Result<(), SimError> {
        Ok(())
    }
    fn record(&mut self, frame: &SimulationFrame) -> Result<(), SimError>;
    fn finish(&mut self) -> Result<(), SimError> {
        Ok(())
    }
}

/// Discards every frame; useful when only the run summary matters.
pub struct NullSink;

impl FrameSink for NullSink {
    fn record(&mut self, _frame: &SimulationFrame) -> Result<(), SimError> {
        Ok(())
    }
}

/// Keeps every frame in memory.
#[derive(Default)]
pub struct MemoryLog {
    pub frames: Vec<SimulationFrame>,
}

impl FrameSink for MemoryLog {
    fn record(&mut self, frame: &SimulationFrame) -> Result<(), SimError> {
        self.frames.push(frame.clone());
        Ok(())
    }
}

pub struct BinaryLogWriter<W: Write> {
    out: W,
    bodies: usize,
}

impl<W: Write> BinaryLogWriter<W> {
    pub fn new(out: W) -> Self {
        Self { out, bodies: 0 }
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> FrameSink for BinaryLogWriter<W> {
    fn begin(&mut self, world: &WorldState) -> Result<(), SimError> {
        let ids = world.piece_ids();
        self.bodies = ids.len();
        self.out.write_all(MAGIC)?;
        self.out.write_all(&world.config().fps.to_le_bytes())?;
        self.out.write_all(&(ids.len() as u32).to_le_bytes())?;
        for id in ids {
            self.out.write_all(&id.to_le_bytes())?;
        }
        Ok(())
    }

    fn record(&mut self, frame: &SimulationFrame) -> Result<(), SimError> {
        debug_assert_eq!(frame.bodies.len(), self.bodies);
        let out = &mut self.out;
        out.write_all(&frame.index.to_le_bytes())?;
        out.write_all(&frame.time.to_le_bytes())?;
        for body in &frame.bodies {
            for v in body.position {
                out.write_all(&(v as f32).to_le_bytes())?;
            }
            for v in body.orientation {
                out.write_all(&(v as f32).to_le_bytes())?;
            }
            out.write_all(&[body.asleep as u8])?;
        }
        out.write_all(&(frame.broken_bonds.len() as u32).to_le_bytes())?;
        for id in &frame.broken_bonds {
            out.write_all(&id.to_le_bytes())?;
        }
        out.write_all(&(frame.broken_anchors.len() as u32).to_le_bytes())?;
        for id in &frame.broken_anchors {
            out.write_all(&id.to_le_bytes())?;
        }
        Ok(())
    }

    fn finish(&mut self) -> Result<(), SimError> {
        self.out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogHeader {
    pub fps: u32,
    pub piece_ids: Vec<u64>,
}

pub struct BinaryLogReader<R: Read> {
    input: R,
    header: LogHeader,
}

impl<R: Read> BinaryLogReader<R> {
    pub fn new(mut input: R) -> Result<Self, SimError> {
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(SimError::BadLog("bad magic".into()));
        }
        let fps = read_u32(&mut input)?;
        let count = read_u32(&mut input)? as usize;
        let mut piece_ids = Vec::with_capacity(count);
        for _ in 0..count {
            let mut buf = [0u8; 8];
            input.read_exact(&mut buf)?;
            piece_ids.push(u64::from_le_bytes(buf));
        }
        Ok(Self {
            input,
            header: LogHeader { fps, piece_ids },
        })
    }

    pub fn header(&self) -> &LogHeader {
        &self.header
    }

    /// Next frame, or `None` at a clean end of stream.
    pub fn next_frame(&mut self) -> Result<Option<SimulationFrame>, SimError> {
        let mut first = [0u8; 4];
        match self.input.read_exact(&mut first) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => return Ok(None),
            Err(e) => return Err(e.into()),
        }
        let index = u32::from_le_bytes(first);
        let mut tbuf = [0u8; 8];
        self.input.read_exact(&mut tbuf)?;
        let time = f64::from_le_bytes(tbuf);

        let mut bodies = Vec::with_capacity(self.header.piece_ids.len());
        for &piece_id in &self.header.piece_ids {
            let mut pose = [0f32; 7];
            for v in pose.iter_mut() {
                let mut buf = [0u8; 4];
                self.input.read_exact(&mut buf)?;
                *v = f32::from_le_bytes(buf);
            }
            let mut flag = [0u8; 1];
            self.input.read_exact(&mut flag)?;
            bodies.push(RigidBodyState {
                piece_id,
                position: [pose[0] as f64, pose[1] as f64, pose[2] as f64],
                orientation: [pose[3] as f64, pose[4] as f64, pose[5] as f64, pose[6] as f64],
                linear_velocity: [0.0; 3],
                angular_velocity: [0.0; 3],
                asleep: flag[0] != 0,
            });
        }
        let broken_bonds = read_id_list(&mut self.input)?;
        let broken_anchors = read_id_list(&mut self.input)?;
        Ok(Some(SimulationFrame {
            index,
            time,
            bodies,
            broken_bonds,
            broken_anchors,
        }))
    }

    pub fn read_all(mut self) -> Result<Vec<SimulationFrame>, SimError> {
        let mut frames = Vec::new();
        while let Some(frame) = self.next_frame()? {
            frames.push(frame);
        }
        Ok(frames)
    }
}

fn read_u32<R: Read>(input: &mut R) -> Result<u32, SimError> {
    let mut buf = [0u8; 4];
    input.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_id_list<R: Read>(input: &mut R) -> Result<Vec<u32>, SimError> {
    let count = read_u32(input)? as usize;
    if count > 1 << 24 {
        return Err(SimError::BadLog(format!("absurd id count {count}")));
    }
    let mut ids = Vec::with_capacity(count);
    for _ in 0..count {
        ids.push(read_u32(input)?);
    }
    Ok(ids)
}

/// End-of-run statistics produced by `run`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub frames: u32,
    pub fps: u32,
    pub duration: f64,
    pub body_count: u32,
    pub bond_count: u32,
    pub anchor_count: u32,
    pub broken_bonds: u32,
    pub broken_anchors: u32,
    /// Cumulative broken bond count after each frame.
    pub broken_bonds_per_frame: Vec<u32>,
    pub final_kinetic_energy: f64,
    /// Bodies more than 10 cm from their rest position at the end.
    pub displaced_pieces: u32,
}

impl RunSummary {
    pub fn broken_bond_fraction(&self) -> f64 {
        if self.bond_count == 0 {
            0.0
        } else {
            self.broken_bonds as f64 / self.bond_count as f64
        }
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!(
            "frames: {} ({} fps, {:.3} s)\n",
            self.frames, self.fps, self.duration
        ));
        s.push_str(&format!("bodies: {}\n", self.body_count));
        s.push_str(&format!(
            "bonds broken: {} / {} ({:.1}%)\n",
            self.broken_bonds,
            self.bond_count,
            100.0 * self.broken_bond_fraction()
        ));
        s.push_str(&format!(
            "anchors broken: {} / {}\n",
            self.broken_anchors, self.anchor_count
        ));
        s.push_str(&format!("displaced pieces: {}\n", self.displaced_pieces));
        s.push_str(&format!(
            "final kinetic energy: {:.6} J\n",
            self.final_kinetic_energy
        ));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_frame(index: u32) -> SimulationFrame {
        SimulationFrame {
            index,
            time: (index + 1) as f64 * 0.025,
            bodies: vec![RigidBodyState {
                piece_id: 3,
                position: [1.0, -2.5, 0.125],
                orientation: [1.0, 0.0, 0.0, 0.0],
                linear_velocity: [0.0; 3],
                angular_velocity: [0.0; 3],
                asleep: false,
            }],
            broken_bonds: if index == 1 { vec![4, 9] } else { vec![] },
            broken_anchors: vec![],
        }
    }

    #[test]
    fn summary_text_mentions_the_key_counts() {
        let summary = RunSummary {
            frames: 80,
            fps: 40,
            duration: 2.0,
            body_count: 12,
            bond_count: 20,
            anchor_count: 4,
            broken_bonds: 5,
            broken_anchors: 1,
            broken_bonds_per_frame: vec![],
            final_kinetic_energy: 0.25,
            displaced_pieces: 3,
        };
        let text = summary.render_text();
        assert!(text.contains("frames: 80 (40 fps, 2.000 s)"));
        assert!(text.contains("bonds broken: 5 / 20 (25.0%)"));
        assert!(text.contains("displaced pieces: 3"));
        assert!((summary.broken_bond_fraction() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn reader_rejects_foreign_bytes() {
        match BinaryLogReader::new(&b"NOTALOG!xxxx"[..]) {
            Err(SimError::BadLog(_)) => {}
            Err(other) => panic!("wrong error: {other}"),
            Ok(_) => panic!("accepted garbage"),
        }
    }

    #[test]
    fn memory_log_collects_frames_in_order() {
        let mut log = MemoryLog::default();
        log.record(&sample_frame(0)).unwrap();
        log.record(&sample_frame(1)).unwrap();
        assert_eq!(log.frames.len(), 2);
        assert_eq!(log.frames[1].broken_bonds, vec![4, 9]);
    }
}
