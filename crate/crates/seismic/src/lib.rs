//! Seismic waveform acquisition and preparation.
//!
//! The pipeline this crate covers: fetch miniSEED from an FDSN dataselect
//! service (or read it from disk, or fall back to CSV), decode and merge the
//! records into per-channel sample streams, convert three channels into a
//! ground displacement series, and resample that series to the simulation
//! rate.

pub mod csvio;
pub mod displacement;
pub mod error;
pub mod fdsn;
pub mod mseed;
pub mod resample;
pub mod types;

pub use csvio::{
    read_channels_csv, read_displacement_csv, write_channels_csv, write_displacement_csv,
};
pub use displacement::{to_displacement, ConversionOptions};
pub use error::SeismicError;
pub use fdsn::{endpoint_from_env, fetch_fdsn, FdsnQuery, DEFAULT_ENDPOINT, ENDPOINT_ENV_VAR};
pub use mseed::{encode_mseed, parse_mseed, Encoding};
pub use resample::resample;
pub use types::{DisplacementSeries, Samples, UnitTag, WaveformChannel};
