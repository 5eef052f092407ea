//! Waveform and displacement containers shared across the seismic pipeline.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::SeismicError;

/// Physical meaning of a channel's sample values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitTag {
    Counts,
    DisplacementM,
    VelocityMps,
}

impl UnitTag {
    pub fn as_str(self) -> &'static str {
        match self {
            UnitTag::Counts => "counts",
            UnitTag::DisplacementM => "displacement_m",
            UnitTag::VelocityMps => "velocity_mps",
        }
    }

    pub fn parse(s: &str) -> Result<Self, SeismicError> {
        match s {
            "counts" => Ok(UnitTag::Counts),
            "displacement_m" => Ok(UnitTag::DisplacementM),
            "velocity_mps" => Ok(UnitTag::VelocityMps),
            other => Err(SeismicError::format(
                "unit tag",
                format!("unknown tag '{other}'"),
            )),
        }
    }
}

/// Raw sample storage. Integer decodings stay integer so re-encoding is
/// lossless; converted or synthetic data is float.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Samples {
    Int(Vec<i32>),
    Float(Vec<f64>),
}

impl Samples {
    pub fn len(&self) -> usize {
        match self {
            Samples::Int(v) => v.len(),
            Samples::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            Samples::Int(v) => v.iter().map(|&x| x as f64).collect(),
            Samples::Float(v) => v.clone(),
        }
    }

    pub fn as_int(&self) -> Option<&[i32]> {
        match self {
            Samples::Int(v) => Some(v),
            Samples::Float(_) => None,
        }
    }
}

/// One merged, contiguous waveform channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveformChannel {
    pub network: String,
    pub station: String,
    pub location: String,
    pub channel: String,
    pub start_time: DateTime<Utc>,
    pub sample_rate: f64,
    pub samples: Samples,
    pub unit_tag: UnitTag,
}

impl WaveformChannel {
    /// "NET.STA.LOC.CHA" identifier, the merge key.
    pub fn id(&self) -> String {
        format!(
            "{}.{}.{}.{}",
            self.network, self.station, self.location, self.channel
        )
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn end_time(&self) -> DateTime<Utc> {
        self.start_time
            + chrono::Duration::from_std(std::time::Duration::from_secs_f64(
                self.len() as f64 / self.sample_rate,
            ))
            .expect("finite duration")
    }
}

/// Three-axis terrain displacement in meters, re-based to start at the
/// origin. x follows BH1 (east), y BH2 (north), z BHZ (up).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisplacementSeries {
    pub sample_rate: f64,
    pub t0: DateTime<Utc>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

impl DisplacementSeries {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn sample(&self, i: usize) -> [f64; 3] {
        [self.x[i], self.y[i], self.z[i]]
    }

    pub fn duration(&self) -> f64 {
        self.len() as f64 / self.sample_rate
    }

    pub fn validate(&self) -> Result<(), SeismicError> {
        if self.x.len() != self.y.len() || self.x.len() != self.z.len() {
            return Err(SeismicError::format(
                "displacement series",
                format!(
                    "axis lengths differ: x={} y={} z={}",
                    self.x.len(),
                    self.y.len(),
                    self.z.len()
                ),
            ));
        }
        if !(self.sample_rate > 0.0) {
            return Err(SeismicError::format(
                "displacement series",
                format!("sample rate {} must be positive", self.sample_rate),
            ));
        }
        for (axis, data) in [("x", &self.x), ("y", &self.y), ("z", &self.z)] {
            if data.iter().any(|v| !v.is_finite()) {
                return Err(SeismicError::format(
                    "displacement series",
                    format!("non-finite value on axis {axis}"),
                ));
            }
        }
        if let (Some(&x0), Some(&y0), Some(&z0)) = (self.x.first(), self.y.first(), self.z.first())
        {
            if x0 != 0.0 || y0 != 0.0 || z0 != 0.0 {
                return Err(SeismicError::format(
                    "displacement series",
                    format!("first sample ({x0}, {y0}, {z0}) is not the origin"),
                ));
            }
        }
        Ok(())
    }
}
