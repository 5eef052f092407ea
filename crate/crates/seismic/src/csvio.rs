//! Text formats: a CSV fallback for three-channel waveform input when no
//! miniSEED is available, and the on-disk form of a displacement series.
//!
//! Channel CSV:
//!
//! ```text
//! # unit: velocity_mps
//! # sample_rate: 40
//! # start: 2020-06-23T15:29:00Z
//! time,bh1,bh2,bhz
//! 0.000,-1.2e-6,0.0,3.4e-6
//! ```
//!
//! `time` is seconds from `start` and must advance by exactly one sample
//! period. Displacement series files use the same shape with an `x,y,z`
//! header and a `# t0:` line.

use chrono::{DateTime, SecondsFormat, TimeZone, Utc};

use crate::error::SeismicError;
use crate::types::{DisplacementSeries, Samples, UnitTag, WaveformChannel};

const TIME_GRID_TOLERANCE: f64 = 1e-6;

/// Parse the three-channel CSV fallback into BH1/BH2/BHZ channels.
pub fn read_channels_csv(text: &str) -> Result<Vec<WaveformChannel>, SeismicError> {
    let mut unit = None;
    let mut rate = None;
    let mut start = None;
    let mut rows: Vec<[f64; 4]> = Vec::new();
    let mut saw_header = false;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let (key, value) = rest
                .split_once(':')
                .ok_or_else(|| bad_line(lineno, "comment is not 'key: value'"))?;
            let value = value.trim();
            match key.trim() {
                "unit" => {
                    unit = Some(
                        UnitTag::parse(value)
                            .map_err(|_| bad_line(lineno, format!("unknown unit tag '{value}'")))?,
                    )
                }
                "sample_rate" => {
                    rate = Some(value.parse::<f64>().map_err(|_| {
                        bad_line(lineno, format!("bad sample rate '{value}'"))
                    })?)
                }
                "start" => {
                    start = Some(parse_time(value).map_err(|e| bad_line(lineno, e))?);
                }
                _ => {}
            }
            continue;
        }
        if !saw_header {
            if line != "time,bh1,bh2,bhz" {
                return Err(bad_line(lineno, format!("expected 'time,bh1,bh2,bhz', got '{line}'")));
            }
            saw_header = true;
            continue;
        }
        let mut cols = [0.0; 4];
        let mut it = line.split(',');
        for slot in &mut cols {
            let field = it
                .next()
                .ok_or_else(|| bad_line(lineno, "expected 4 columns"))?;
            *slot = field
                .trim()
                .parse::<f64>()
                .map_err(|_| bad_line(lineno, format!("bad number '{field}'")))?;
        }
        if it.next().is_some() {
            return Err(bad_line(lineno, "expected 4 columns"));
        }
        rows.push(cols);
    }

    if rows.is_empty() {
        return Err(SeismicError::NoData);
    }
    let unit = unit.ok_or_else(|| SeismicError::format("channel csv", "missing '# unit:' line"))?;
    let rate = match rate {
        Some(r) if r > 0.0 => r,
        Some(r) => return Err(SeismicError::format("channel csv", format!("sample rate {r} not positive"))),
        None => return Err(SeismicError::format("channel csv", "missing '# sample_rate:' line")),
    };
    let start = start.unwrap_or_else(|| Utc.timestamp_opt(0, 0).unwrap());

    let period = 1.0 / rate;
    for (i, row) in rows.iter().enumerate() {
        if (row[0] - i as f64 * period).abs() > TIME_GRID_TOLERANCE {
            return Err(SeismicError::format(
                "channel csv",
                format!("row {i} time {} is off the {rate} Hz grid", row[0]),
            ));
        }
    }

    let channel = |code: &str, col: usize| WaveformChannel {
        network: String::new(),
        station: String::new(),
        location: String::new(),
        channel: code.to_string(),
        start_time: start,
        sample_rate: rate,
        samples: Samples::Float(rows.iter().map(|r| r[col]).collect()),
        unit_tag: unit,
    };
    Ok(vec![
        channel("BH1", 1),
        channel("BH2", 2),
        channel("BHZ", 3),
    ])
}

/// Write three channels in the CSV fallback layout. Channels must share
/// rate, length, start time, and unit tag.
pub fn write_channels_csv(channels: &[WaveformChannel]) -> Result<String, SeismicError> {
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
    let len = channels[0].samples.len();
    for ch in channels {
        if ch.samples.len() != len
            || ch.start_time != channels[0].start_time
            || ch.unit_tag != channels[0].unit_tag
        {
            return Err(SeismicError::format(
                "channel csv",
                "channels disagree on length, start, or unit",
            ));
        }
    }
    let cols: Vec<Vec<f64>> = channels.iter().map(|c| c.samples.to_f64()).collect();
    let mut out = String::new();
    out.push_str(&format!("# unit: {}\n", channels[0].unit_tag.as_str()));
    out.push_str(&format!("# sample_rate: {rate}\n"));
    out.push_str(&format!(
        "# start: {}\n",
        channels[0]
            .start_time
            .to_rfc3339_opts(SecondsFormat::AutoSi, true)
    ));
    out.push_str("time,bh1,bh2,bhz\n");
    for i in 0..len {
        out.push_str(&format!(
            "{},{},{},{}\n",
            i as f64 / rate,
            cols[0][i],
            cols[1][i],
            cols[2][i]
        ));
    }
    Ok(out)
}

/// Serialize a displacement series to its CSV file form.
pub fn write_displacement_csv(series: &DisplacementSeries) -> String {
    let mut out = String::new();
    out.push_str(&format!("# sample_rate: {}\n", series.sample_rate));
    out.push_str(&format!(
        "# t0: {}\n",
        series.t0.to_rfc3339_opts(SecondsFormat::AutoSi, true)
    ));
    out.push_str("x,y,z\n");
    for i in 0..series.len() {
        out.push_str(&format!(
            "{},{},{}\n",
            series.x[i], series.y[i], series.z[i]
        ));
    }
    out
}

/// Parse a displacement series file written by [`write_displacement_csv`].
pub fn read_displacement_csv(text: &str) -> Result<DisplacementSeries, SeismicError> {
    let mut rate = None;
    let mut t0 = None;
    let mut saw_header = false;
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut z = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let (key, value) = rest
                .split_once(':')
                .ok_or_else(|| bad_line(lineno, "comment is not 'key: value'"))?;
            match key.trim() {
                "sample_rate" => {
                    rate = Some(value.trim().parse::<f64>().map_err(|_| {
                        bad_line(lineno, format!("bad sample rate '{}'", value.trim()))
                    })?)
                }
                "t0" => t0 = Some(parse_time(value.trim()).map_err(|e| bad_line(lineno, e))?),
                _ => {}
            }
            continue;
        }
        if !saw_header {
            if line != "x,y,z" {
                return Err(bad_line(lineno, format!("expected 'x,y,z', got '{line}'")));
            }
            saw_header = true;
            continue;
        }
        let mut it = line.split(',');
        let mut next = |name: &str| -> Result<f64, SeismicError> {
            it.next()
                .ok_or_else(|| bad_line(lineno, format!("missing {name} column")))?
                .trim()
                .parse::<f64>()
                .map_err(|_| bad_line(lineno, format!("bad number in {name} column")))
        };
        x.push(next("x")?);
        y.push(next("y")?);
        z.push(next("z")?);
    }

    let rate = rate.ok_or_else(|| SeismicError::format("displacement csv", "missing '# sample_rate:' line"))?;
    let t0 = t0.ok_or_else(|| SeismicError::format("displacement csv", "missing '# t0:' line"))?;
    if x.is_empty() {
        return Err(SeismicError::NoData);
    }
    let series = DisplacementSeries {
        sample_rate: rate,
        t0,
        x,
        y,
        z,
    };
    series.validate()?;
    Ok(series)
}

fn parse_time(value: &str) -> Result<DateTime<Utc>, String> {
    DateTime::parse_from_rfc3339(value)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| format!("bad timestamp '{value}': {e}"))
}

fn bad_line(lineno: usize, reason: impl Into<String>) -> SeismicError {
    SeismicError::format(format!("csv line {}", lineno + 1), reason.into())
}
