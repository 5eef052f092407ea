//! miniSEED v2 records: fixed header, blockette 1000, and the integer
//! codecs INT16, INT32, Steim-1, and Steim-2.
//!
//! Parsing walks fixed-length records (commonly 512 or 4096 bytes), decodes
//! each, then merges per-channel segments in time order. Encoding exists so
//! fixtures and round-trip checks never depend on an external tool.

use chrono::{DateTime, Datelike, TimeZone, Timelike, Utc};

use crate::error::SeismicError;
use crate::types::{Samples, UnitTag, WaveformChannel};

pub const FIXED_HEADER_LEN: usize = 48;
const DATA_OFFSET: usize = 64;

/// Gaps of at most this many samples are linearly bridged during merge.
pub const MAX_BRIDGEABLE_GAP: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    Int16,
    Int32,
    Steim1,
    Steim2,
}

impl Encoding {
    pub fn code(self) -> u8 {
        match self {
            Encoding::Int16 => 1,
            Encoding::Int32 => 3,
            Encoding::Steim1 => 10,
            Encoding::Steim2 => 11,
        }
    }

    fn from_code(code: u8) -> Result<Self, SeismicError> {
        match code {
            1 => Ok(Encoding::Int16),
            3 => Ok(Encoding::Int32),
            10 => Ok(Encoding::Steim1),
            11 => Ok(Encoding::Steim2),
            other => Err(SeismicError::UnknownEncoding(other)),
        }
    }
}

struct Segment {
    network: String,
    station: String,
    location: String,
    channel: String,
    start: DateTime<Utc>,
    rate: f64,
    samples: Vec<i32>,
}

/// Parse a concatenation of miniSEED v2 records into merged channels.
/// Channels come back sorted by id; samples are raw counts.
pub fn parse_mseed(bytes: &[u8]) -> Result<Vec<WaveformChannel>, SeismicError> {
    let mut segments = Vec::new();
    let mut offset = 0usize;
    while offset < bytes.len() {
        let (segment, record_len) = parse_record(bytes, offset)?;
        if let Some(seg) = segment {
            segments.push(seg);
        }
        offset += record_len;
    }
    merge_segments(segments)
}

fn parse_record(
    bytes: &[u8],
    offset: usize,
) -> Result<(Option<Segment>, usize), SeismicError> {
    let rec = &bytes[offset..];
    if rec.len() < FIXED_HEADER_LEN {
        return Err(SeismicError::Truncated {
            offset,
            need: FIXED_HEADER_LEN,
            have: rec.len(),
        });
    }
    let corrupt = |reason: String| SeismicError::CorruptRecord { offset, reason };

    let quality = rec[6];
    if !b"DRQM".contains(&quality) {
        return Err(corrupt(format!(
            "unexpected quality indicator 0x{quality:02x}"
        )));
    }
    let field = |range: std::ops::Range<usize>| -> String {
        String::from_utf8_lossy(&rec[range]).trim().to_string()
    };
    let station = field(8..13);
    let location = field(13..15);
    let channel = field(15..18);
    let network = field(18..20);

    let u16be = |at: usize| u16::from_be_bytes([rec[at], rec[at + 1]]);
    let i16be = |at: usize| i16::from_be_bytes([rec[at], rec[at + 1]]);

    let year = u16be(20);
    let doy = u16be(22);
    let (hour, minute, second) = (rec[24], rec[25], rec[26]);
    let fract = u16be(28); // units of 0.0001 s
    let nsamples = u16be(30) as usize;
    let rate = sample_rate(i16be(32), i16be(34))
        .ok_or_else(|| corrupt("invalid sample rate factor/multiplier".into()))?;

    let activity_flags = rec[36];
    let time_correction =
        i32::from_be_bytes([rec[40], rec[41], rec[42], rec[43]]);
    let data_offset = u16be(44) as usize;
    let mut blkt_offset = u16be(46) as usize;

    let mut start = Utc
        .with_ymd_and_hms(year as i32, 1, 1, hour as u32, minute as u32, second as u32)
        .single()
        .and_then(|t| {
            t.with_ordinal(doy as u32)
                .map(|d| d + chrono::Duration::microseconds(fract as i64 * 100))
        })
        .ok_or_else(|| corrupt(format!("invalid start time {year}-{doy}")))?;
    // apply the header time correction unless the writer already did
    if activity_flags & 0x02 == 0 {
        start += chrono::Duration::microseconds(time_correction as i64 * 100);
    }

    // walk the blockette chain for blockette 1000
    let mut b1000 = None;
    let mut hops = 0;
    while blkt_offset != 0 {
        hops += 1;
        if hops > 16 || blkt_offset + 4 > rec.len() {
            return Err(corrupt("malformed blockette chain".into()));
        }
        let btype = u16be(blkt_offset);
        let next = u16be(blkt_offset + 2) as usize;
        if btype == 1000 {
            if blkt_offset + 7 > rec.len() {
                return Err(corrupt("truncated blockette 1000".into()));
            }
            b1000 = Some((
                rec[blkt_offset + 4],
                rec[blkt_offset + 5],
                rec[blkt_offset + 6],
            ));
        }
        if next != 0 && next <= blkt_offset {
            return Err(corrupt("blockette chain does not advance".into()));
        }
        blkt_offset = next;
    }
    let (enc_code, word_order, len_pow) =
        b1000.ok_or_else(|| corrupt("missing blockette 1000".into()))?;
    if word_order != 1 {
        return Err(SeismicError::UnsupportedWordOrder(word_order));
    }
    let record_len = 1usize << len_pow;
    if !(128..=65536).contains(&record_len) {
        return Err(corrupt(format!("implausible record length 2^{len_pow}")));
    }
    if rec.len() < record_len {
        return Err(SeismicError::Truncated {
            offset,
            need: record_len,
            have: rec.len(),
        });
    }
    if nsamples == 0 {
        return Ok((None, record_len));
    }
    let encoding = Encoding::from_code(enc_code)?;
    if data_offset < FIXED_HEADER_LEN || data_offset >= record_len {
        return Err(corrupt(format!("data offset {data_offset} out of record")));
    }
    let payload = &rec[data_offset..record_len];
    let samples = decode_payload(payload, encoding, nsamples, offset)?;
    Ok((
        Some(Segment {
            network,
            station,
            location,
            channel,
            start,
            rate,
            samples,
        }),
        record_len,
    ))
}

fn sample_rate(factor: i16, multiplier: i16) -> Option<f64> {
    let (f, m) = (factor as f64, multiplier as f64);
    let rate = match (factor, multiplier) {
        (0, _) | (_, 0) => return None,
        (f_, m_) if f_ > 0 && m_ > 0 => f * m,
        (f_, m_) if f_ > 0 && m_ < 0 => -f / m,
        (f_, m_) if f_ < 0 && m_ > 0 => -m / f,
        _ => 1.0 / (f * m),
    };
    (rate > 0.0).then_some(rate)
}

fn decode_payload(
    payload: &[u8],
    encoding: Encoding,
    nsamples: usize,
    offset: usize,
) -> Result<Vec<i32>, SeismicError> {
    match encoding {
        Encoding::Int16 => {
            let avail = payload.len() / 2;
            if avail < nsamples {
                return Err(SeismicError::SampleCountMismatch {
                    offset,
                    declared: nsamples,
                    decoded: avail,
                });
            }
            Ok((0..nsamples)
                .map(|i| i16::from_be_bytes([payload[2 * i], payload[2 * i + 1]]) as i32)
                .collect())
        }
        Encoding::Int32 => {
            let avail = payload.len() / 4;
            if avail < nsamples {
                return Err(SeismicError::SampleCountMismatch {
                    offset,
                    declared: nsamples,
                    decoded: avail,
                });
            }
            Ok((0..nsamples)
                .map(|i| {
                    i32::from_be_bytes([
                        payload[4 * i],
                        payload[4 * i + 1],
                        payload[4 * i + 2],
                        payload[4 * i + 3],
                    ])
                })
                .collect())
        }
        Encoding::Steim1 | Encoding::Steim2 => {
            decode_steim(payload, encoding == Encoding::Steim2, nsamples, offset)
        }
    }
}

fn sign_extend(v: u32, bits: u32) -> i32 {
    ((v << (32 - bits)) as i32) >> (32 - bits)
}

fn decode_steim(
    payload: &[u8],
    steim2: bool,
    nsamples: usize,
    offset: usize,
) -> Result<Vec<i32>, SeismicError> {
    let corrupt = |reason: String| SeismicError::CorruptRecord { offset, reason };
    let nframes = payload.len() / 64;
    if nframes == 0 {
        return Err(corrupt("no Steim frames in payload".into()));
    }
    let word = |frame: usize, w: usize| {
        let at = frame * 64 + w * 4;
        u32::from_be_bytes([payload[at], payload[at + 1], payload[at + 2], payload[at + 3]])
    };
    let x0 = word(0, 1) as i32;
    let xn = word(0, 2) as i32;

    let mut diffs: Vec<i32> = Vec::with_capacity(nsamples);
    'frames: for f in 0..nframes {
        let ctrl = word(f, 0);
        for w in 1..16 {
            if f == 0 && w < 3 {
                continue;
            }
            if diffs.len() >= nsamples {
                break 'frames;
            }
            let code = (ctrl >> (30 - 2 * w)) & 3;
            let v = word(f, w);
            match (code, steim2) {
                (0, _) => continue,
                (1, _) => {
                    for b in v.to_be_bytes() {
                        diffs.push(b as i8 as i32);
                    }
                }
                (2, false) => {
                    diffs.push(sign_extend(v >> 16, 16));
                    diffs.push(sign_extend(v & 0xffff, 16));
                }
                (3, false) => diffs.push(v as i32),
                (2, true) => match v >> 30 {
                    1 => diffs.push(sign_extend(v & 0x3fff_ffff, 30)),
                    2 => {
                        diffs.push(sign_extend((v >> 15) & 0x7fff, 15));
                        diffs.push(sign_extend(v & 0x7fff, 15));
                    }
                    3 => {
                        for k in 0..3 {
                            diffs.push(sign_extend((v >> (20 - 10 * k)) & 0x3ff, 10));
                        }
                    }
                    dnib => return Err(corrupt(format!("invalid Steim-2 dnib {dnib} for code 2"))),
                },
                (3, true) => match v >> 30 {
                    0 => {
                        for k in 0..5 {
                            diffs.push(sign_extend((v >> (24 - 6 * k)) & 0x3f, 6));
                        }
                    }
                    1 => {
                        for k in 0..6 {
                            diffs.push(sign_extend((v >> (25 - 5 * k)) & 0x1f, 5));
                        }
                    }
                    2 => {
                        for k in 0..7 {
                            diffs.push(sign_extend((v >> (24 - 4 * k)) & 0xf, 4));
                        }
                    }
                    dnib => return Err(corrupt(format!("invalid Steim-2 dnib {dnib} for code 3"))),
                },
                _ => unreachable!(),
            }
        }
    }
    if diffs.len() < nsamples {
        return Err(SeismicError::SampleCountMismatch {
            offset,
            declared: nsamples,
            decoded: diffs.len(),
        });
    }
    diffs.truncate(nsamples);

    let mut out = Vec::with_capacity(nsamples);
    out.push(x0);
    for d in diffs.iter().skip(1) {
        out.push(out.last().unwrap() + d);
    }
    let last = *out.last().unwrap();
    if last != xn {
        return Err(corrupt(format!(
            "reverse integration constant mismatch: decoded {last}, header says {xn}"
        )));
    }
    Ok(out)
}

fn merge_segments(segments: Vec<Segment>) -> Result<Vec<WaveformChannel>, SeismicError> {
    let mut by_id: std::collections::BTreeMap<String, Vec<Segment>> = Default::default();
    for seg in segments {
        let id = format!(
            "{}.{}.{}.{}",
            seg.network, seg.station, seg.location, seg.channel
        );
        by_id.entry(id).or_default().push(seg);
    }

    let mut channels = Vec::with_capacity(by_id.len());
    for (id, mut segs) in by_id {
        segs.sort_by_key(|s| s.start);
        let rate = segs[0].rate;
        if let Some(bad) = segs.iter().find(|s| s.rate != rate) {
            return Err(SeismicError::RateMismatch(vec![rate, bad.rate]));
        }
        let period_us = 1e6 / rate;
        let first = segs.remove(0);
        let start = first.start;
        let mut samples = first.samples;
        let mut end_us = samples.len() as f64 * period_us;
        for seg in segs {
            let seg_at_us = (seg.start - start)
                .num_microseconds()
                .unwrap_or(i64::MAX) as f64;
            let gap = ((seg_at_us - end_us) / period_us).round() as i64;
            if gap < 0 {
                return Err(SeismicError::Overlap {
                    id,
                    samples: (-gap) as usize,
                    at: seg.start.to_rfc3339(),
                });
            }
            if gap as usize > MAX_BRIDGEABLE_GAP {
                return Err(SeismicError::Gap {
                    id,
                    samples: gap as usize,
                    at: seg.start.to_rfc3339(),
                    limit: MAX_BRIDGEABLE_GAP,
                });
            }
            if gap > 0 {
                let a = *samples.last().expect("nonempty segment") as f64;
                let b = seg.samples[0] as f64;
                for k in 1..=gap {
                    let t = k as f64 / (gap + 1) as f64;
                    samples.push((a + (b - a) * t).round() as i32);
                }
            }
            samples.extend_from_slice(&seg.samples);
            end_us = samples.len() as f64 * period_us;
        }
        channels.push(WaveformChannel {
            network: first.network,
            station: first.station,
            location: first.location,
            channel: first.channel,
            start_time: start,
            sample_rate: rate,
            samples: Samples::Int(samples),
            unit_tag: UnitTag::Counts,
        });
    }
    Ok(channels)
}

/// Encode one channel as fixed-length miniSEED v2 records.
/// `record_len` must be a power of two (512 and 4096 are customary).
pub fn encode_mseed(
    channel: &WaveformChannel,
    encoding: Encoding,
    record_len: usize,
) -> Result<Vec<u8>, SeismicError> {
    if !record_len.is_power_of_two() || !(128..=65536).contains(&record_len) {
        return Err(SeismicError::format(
            "encode",
            format!("record length {record_len} is not a supported power of two"),
        ));
    }
    let samples = channel.samples.as_int().ok_or_else(|| {
        SeismicError::format("encode", "only integer-sample channels can be encoded")
    })?;
    let rate_factor = channel.sample_rate.round();
    if (channel.sample_rate - rate_factor).abs() > 1e-9
        || !(1.0..=32000.0).contains(&rate_factor)
    {
        return Err(SeismicError::format(
            "encode",
            format!("sample rate {} is not an integral Hz value", channel.sample_rate),
        ));
    }
    if encoding == Encoding::Int16 {
        if let Some(bad) = samples
            .iter()
            .find(|&&s| s > i16::MAX as i32 || s < i16::MIN as i32)
        {
            return Err(SeismicError::format(
                "encode",
                format!("sample {bad} does not fit INT16"),
            ));
        }
    }

    let mut out = Vec::new();
    let mut written = 0usize;
    let mut seq = 1u32;
    while written < samples.len() {
        let remaining = &samples[written..];
        let prev_last = if written == 0 {
            0
        } else {
            samples[written - 1]
        };
        let (payload, consumed) = match encoding {
            Encoding::Int16 => {
                let cap = (record_len - DATA_OFFSET) / 2;
                let n = cap.min(remaining.len());
                let mut p = Vec::with_capacity(n * 2);
                for &s in &remaining[..n] {
                    p.extend_from_slice(&(s as i16).to_be_bytes());
                }
                (p, n)
            }
            Encoding::Int32 => {
                let cap = (record_len - DATA_OFFSET) / 4;
                let n = cap.min(remaining.len());
                let mut p = Vec::with_capacity(n * 4);
                for &s in &remaining[..n] {
                    p.extend_from_slice(&s.to_be_bytes());
                }
                (p, n)
            }
            Encoding::Steim1 | Encoding::Steim2 => {
                let frames = (record_len - DATA_OFFSET) / 64;
                pack_steim(remaining, prev_last, frames, encoding == Encoding::Steim2)?
            }
        };
        let start = channel.start_time
            + chrono::Duration::microseconds(
                (written as f64 / channel.sample_rate * 1e6).round() as i64,
            );
        write_record(
            &mut out,
            channel,
            seq,
            start,
            consumed,
            rate_factor as i16,
            encoding,
            record_len,
            &payload,
        );
        written += consumed;
        seq += 1;
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn write_record(
    out: &mut Vec<u8>,
    channel: &WaveformChannel,
    seq: u32,
    start: DateTime<Utc>,
    nsamples: usize,
    rate_factor: i16,
    encoding: Encoding,
    record_len: usize,
    payload: &[u8],
) {
    let base = out.len();
    out.resize(base + record_len, 0);
    let rec = &mut out[base..];
    rec[..6].copy_from_slice(format!("{:06}", seq % 1_000_000).as_bytes());
    rec[6] = b'D';
    rec[7] = b' ';
    let pad = |dst: &mut [u8], s: &str| {
        let bytes = s.as_bytes();
        for (i, slot) in dst.iter_mut().enumerate() {
            *slot = *bytes.get(i).unwrap_or(&b' ');
        }
    };
    pad(&mut rec[8..13], &channel.station);
    pad(&mut rec[13..15], &channel.location);
    pad(&mut rec[15..18], &channel.channel);
    pad(&mut rec[18..20], &channel.network);

    rec[20..22].copy_from_slice(&(start.year() as u16).to_be_bytes());
    rec[22..24].copy_from_slice(&(start.ordinal() as u16).to_be_bytes());
    rec[24] = start.hour() as u8;
    rec[25] = start.minute() as u8;
    rec[26] = start.second() as u8;
    rec[27] = 0;
    let fract = (start.timestamp_subsec_micros() / 100) as u16;
    rec[28..30].copy_from_slice(&fract.to_be_bytes());
    rec[30..32].copy_from_slice(&(nsamples as u16).to_be_bytes());
    rec[32..34].copy_from_slice(&rate_factor.to_be_bytes());
    rec[34..36].copy_from_slice(&1i16.to_be_bytes());
    rec[39] = 1; // one blockette
    rec[44..46].copy_from_slice(&(DATA_OFFSET as u16).to_be_bytes());
    rec[46..48].copy_from_slice(&(FIXED_HEADER_LEN as u16).to_be_bytes());

    rec[48..50].copy_from_slice(&1000u16.to_be_bytes());
    rec[50..52].copy_from_slice(&0u16.to_be_bytes());
    rec[52] = encoding.code();
    rec[53] = 1; // big-endian
    rec[54] = record_len.trailing_zeros() as u8;

    rec[DATA_OFFSET..DATA_OFFSET + payload.len()].copy_from_slice(payload);
}

/// Pack as many samples as fit into `max_frames` Steim frames.
/// Returns the serialized frames and the sample count consumed.
fn pack_steim(
    samples: &[i32],
    prev_last: i32,
    max_frames: usize,
    steim2: bool,
) -> Result<(Vec<u8>, usize), SeismicError> {
    let diffs: Vec<i64> = samples
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let prev = if i == 0 { prev_last } else { samples[i - 1] };
            s as i64 - prev as i64
        })
        .collect();

    let fits = |d: i64, bits: u32| -> bool {
        let lim = 1i64 << (bits - 1);
        (-lim..lim).contains(&d)
    };
    // (count, bits, control code, dnib or None), largest count first
    let patterns: &[(usize, u32, u32, Option<u32>)] = if steim2 {
        &[
            (7, 4, 3, Some(2)),
            (6, 5, 3, Some(1)),
            (5, 6, 3, Some(0)),
            (4, 8, 1, None),
            (3, 10, 2, Some(3)),
            (2, 15, 2, Some(2)),
            (1, 30, 2, Some(1)),
        ]
    } else {
        &[(4, 8, 1, None), (2, 16, 2, None), (1, 32, 3, None)]
    };

    let mut frames: Vec<[u32; 16]> = vec![[0; 16]];
    let (mut frame, mut word) = (0usize, 3usize); // frame 0: ctrl, X0, Xn
    let mut consumed = 0usize;

    'pack: while consumed < diffs.len() {
        if word == 16 {
            if frames.len() == max_frames {
                break;
            }
            frames.push([0; 16]);
            frame += 1;
            word = 1;
        }
        let rest = &diffs[consumed..];
        for &(count, bits, code, dnib) in patterns {
            if rest.len() < count || !rest[..count].iter().all(|&d| fits(d, bits)) {
                continue;
            }
            let mut w: u32 = dnib.map_or(0, |d| d << 30);
            let span = if dnib.is_some() { 30 } else { 32 };
            for (k, &d) in rest[..count].iter().enumerate() {
                let mask = ((1u64 << bits) - 1) as u32;
                let shift = span - bits * (k as u32 + 1);
                w |= ((d as u32) & mask) << shift;
            }
            frames[frame][word] = w;
            frames[frame][0] |= code << (30 - 2 * word);
            consumed += count;
            word += 1;
            continue 'pack;
        }
        // nothing fit: either a too-large difference or give up on this record
        let d = rest[0];
        let max_bits = if steim2 { 30 } else { 32 };
        if !fits(d, max_bits) {
            return Err(SeismicError::format(
                "encode",
                format!("difference {d} exceeds the {max_bits}-bit Steim range"),
            ));
        }
        unreachable!("a lone difference always fits the widest pattern");
    }
    if consumed == 0 {
        return Err(SeismicError::format(
            "encode",
            "record too small to hold any sample",
        ));
    }

    frames[0][1] = samples[0] as u32;
    frames[0][2] = samples[consumed - 1] as u32;

    let mut bytes = Vec::with_capacity(frames.len() * 64);
    for f in &frames {
        for w in f {
            bytes.extend_from_slice(&w.to_be_bytes());
        }
    }
    Ok((bytes, consumed))
}
