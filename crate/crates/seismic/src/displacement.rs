//! Conversion of three waveform channels into a terrain displacement series.

use crate::error::SeismicError;
use crate::types::{DisplacementSeries, UnitTag, WaveformChannel};

/// How raw channels become displacement.
#[derive(Debug, Clone, Copy)]
pub struct ConversionOptions {
    /// Physical units per count, applied to `counts` channels before the
    /// unit conversion. Required when any channel is tagged `counts`.
    pub sensitivity: Option<f64>,
    /// What one scaled count means physically.
    pub counts_unit: UnitTag,
    /// Remove the best-fit line from velocity before integrating, so
    /// instrument drift does not masquerade as terrain travel.
    pub detrend: bool,
}

impl Default for ConversionOptions {
    fn default() -> Self {
        Self {
            sensitivity: None,
            counts_unit: UnitTag::VelocityMps,
            detrend: true,
        }
    }
}

/// Convert BH1/BH2/BHZ channels (any order) into an east/north/up
/// displacement series, trimmed to the channels' common time window and
/// re-based to start at the origin.
pub fn to_displacement(
    channels: &[WaveformChannel],
    options: &ConversionOptions,
) -> Result<DisplacementSeries, SeismicError> {
    if channels.len() != 3 {
        return Err(SeismicError::ChannelCount {
            expected: 3,
            got: channels.len(),
        });
    }
    let rate = channels[0].sample_rate;
    if channels.iter().any(|c| c.sample_rate != rate) {
        return Err(SeismicError::RateMismatch(
            channels.iter().map(|c| c.sample_rate).collect(),
        ));
    }

    let mut by_axis: [Option<&WaveformChannel>; 3] = [None, None, None];
    for ch in channels {
        let axis = axis_of(&ch.channel).ok_or_else(|| {
            SeismicError::format("channel mapping", format!("cannot map '{}' to an axis", ch.channel))
        })?;
        if by_axis[axis].is_some() {
            return Err(SeismicError::format(
                "channel mapping",
                format!("two channels map to axis {}", ["x", "y", "z"][axis]),
            ));
        }
        by_axis[axis] = Some(ch);
    }
    let [x_ch, y_ch, z_ch] = by_axis.map(|c| c.expect("three distinct axes"));

    // trim to the common window
    let t_start = channels.iter().map(|c| c.start_time).max().unwrap();
    let t_end = channels.iter().map(|c| c.end_time()).min().unwrap();
    if t_end <= t_start {
        return Err(SeismicError::NoOverlap);
    }
    let window = |ch: &WaveformChannel| -> Vec<f64> {
        let skip = ((t_start - ch.start_time).num_microseconds().unwrap() as f64 * 1e-6
            * rate)
            .round() as usize;
        let take = (((t_end - t_start).num_microseconds().unwrap() as f64 * 1e-6) * rate)
            .round() as usize;
        ch.samples
            .to_f64()
            .into_iter()
            .skip(skip)
            .take(take)
            .collect()
    };

    let convert = |ch: &WaveformChannel, data: Vec<f64>| -> Result<Vec<f64>, SeismicError> {
        let (data, unit) = match ch.unit_tag {
            UnitTag::Counts => {
                let k = options.sensitivity.ok_or(SeismicError::MissingSensitivity)?;
                (data.iter().map(|v| v * k).collect(), options.counts_unit)
            }
            tag => (data, tag),
        };
        let mut disp = match unit {
            UnitTag::DisplacementM => data,
            UnitTag::VelocityMps => {
                let v = if options.detrend { detrend(&data) } else { data };
                integrate_trapezoid(&v, 1.0 / rate)
            }
            UnitTag::Counts => unreachable!("counts resolved above"),
        };
        let base = disp[0];
        for d in &mut disp {
            *d -= base;
        }
        Ok(disp)
    };

    let series = DisplacementSeries {
        sample_rate: rate,
        t0: t_start,
        x: convert(x_ch, window(x_ch))?,
        y: convert(y_ch, window(y_ch))?,
        z: convert(z_ch, window(z_ch))?,
    };
    series.validate()?;
    Ok(series)
}

/// BH1/E -> x (east), BH2/N -> y (north), BHZ -> z (up).
fn axis_of(channel: &str) -> Option<usize> {
    match channel.chars().last()? {
        '1' | 'E' => Some(0),
        '2' | 'N' => Some(1),
        'Z' => Some(2),
        _ => None,
    }
}

/// Cumulative trapezoid integral starting at zero.
fn integrate_trapezoid(v: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(v.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..v.len() {
        acc += (v[i - 1] + v[i]) * 0.5 * dt;
        out.push(acc);
    }
    out
}

/// Subtract the least-squares line through the samples.
fn detrend(v: &[f64]) -> Vec<f64> {
    let n = v.len() as f64;
    if v.len() < 2 {
        return v.to_vec();
    }
    let t_mean = (n - 1.0) / 2.0;
    let v_mean = v.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &val) in v.iter().enumerate() {
        let dt = i as f64 - t_mean;
        num += dt * (val - v_mean);
        den += dt * dt;
    }
    let slope = if den > 0.0 { num / den } else { 0.0 };
    v.iter()
        .enumerate()
        .map(|(i, &val)| val - v_mean - slope * (i as f64 - t_mean))
        .collect()
}
