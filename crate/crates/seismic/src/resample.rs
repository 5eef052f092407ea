//! Rational-ratio resampling of displacement series with a windowed-sinc
//! kernel, so a 40 Hz record can drive simulations stepped at 90 or 240 Hz.

use crate::error::SeismicError;
use crate::types::DisplacementSeries;

/// Half-width of the interpolation kernel, in input samples.
const KERNEL_HALF_WIDTH: isize = 32;

/// Resample to one of the supported simulation rates (40, 90, or 240 Hz).
/// 40 -> 40 returns the input samples untouched.
pub fn resample(
    series: &DisplacementSeries,
    target_rate: f64,
) -> Result<DisplacementSeries, SeismicError> {
    let (l, m) = ratio_for(series.sample_rate, target_rate)?;
    if l == 1 && m == 1 {
        return Ok(series.clone());
    }
    Ok(DisplacementSeries {
        sample_rate: target_rate,
        t0: series.t0,
        x: resample_axis(&series.x, l, m),
        y: resample_axis(&series.y, l, m),
        z: resample_axis(&series.z, l, m),
    })
}

fn ratio_for(from: f64, to: f64) -> Result<(usize, usize), SeismicError> {
    match (from, to) {
        (40.0, 40.0) => Ok((1, 1)),
        (40.0, 90.0) => Ok((9, 4)),
        (40.0, 240.0) => Ok((6, 1)),
        _ => Err(SeismicError::UnsupportedRate(to)),
    }
}

/// Interpolate at positions n*m/l input samples. Samples beyond either end
/// are mirrored so the kernel never sees an artificial step to zero, and
/// each output is normalized by its kernel weight sum to keep unity gain.
fn resample_axis(x: &[f64], l: usize, m: usize) -> Vec<f64> {
    if x.is_empty() {
        return Vec::new();
    }
    let n_out = (x.len() * l + m - 1) / m;
    let len = x.len() as isize;
    let mut out = Vec::with_capacity(n_out);
    for n in 0..n_out {
        let p = n as f64 * m as f64 / l as f64;
        let k0 = p.floor() as isize;
        let mut acc = 0.0;
        let mut wsum = 0.0;
        for k in (k0 - KERNEL_HALF_WIDTH + 1)..=(k0 + KERNEL_HALF_WIDTH) {
            let w = kernel(p - k as f64);
            acc += w * x[mirror(k, len)];
            wsum += w;
        }
        out.push(acc / wsum);
    }
    out
}

fn mirror(k: isize, len: isize) -> usize {
    let mut k = k;
    loop {
        if k < 0 {
            k = -k;
        } else if k >= len {
            k = 2 * (len - 1) - k;
        } else {
            return k as usize;
        }
    }
}

/// Blackman-windowed sinc, cut off at the input Nyquist frequency.
fn kernel(t: f64) -> f64 {
    let w = KERNEL_HALF_WIDTH as f64;
    if t.abs() >= w {
        return 0.0;
    }
    let u = std::f64::consts::PI * t;
    let sinc = if u.abs() < 1e-12 { 1.0 } else { u.sin() / u };
    let q = std::f64::consts::PI * t / w;
    let window = 0.42 + 0.5 * q.cos() + 0.08 * (2.0 * q).cos();
    sinc * window
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{TimeZone, Utc};

    fn series(rate: f64, x: Vec<f64>) -> DisplacementSeries {
        let n = x.len();
        DisplacementSeries {
            sample_rate: rate,
            t0: Utc.with_ymd_and_hms(2020, 6, 23, 15, 29, 0).unwrap(),
            x,
            y: vec![0.0; n],
            z: vec![0.0; n],
        }
    }

    fn sine(rate: f64, f: f64, seconds: f64) -> Vec<f64> {
        let n = (rate * seconds) as usize;
        (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * f * i as f64 / rate).sin())
            .collect()
    }

    #[test]
    fn identity_rate_is_bitwise_passthrough() {
        let s = series(40.0, sine(40.0, 3.7, 10.0));
        let r = resample(&s, 40.0).unwrap();
        assert_eq!(s.x, r.x);
        assert_eq!(s.sample_rate, r.sample_rate);
    }

    #[test]
    fn output_lengths_follow_the_rational_ratio() {
        let s = series(40.0, vec![0.0; 14400]);
        assert_eq!(resample(&s, 240.0).unwrap().len(), 86400);
        assert_eq!(resample(&s, 90.0).unwrap().len(), 32400);
    }

    #[test]
    fn one_hertz_sine_survives_upsampling_to_240() {
        let s = series(40.0, sine(40.0, 1.0, 60.0));
        let r = resample(&s, 240.0).unwrap();
        let n = r.len();
        for i in n / 20..n * 19 / 20 {
            let t = i as f64 / 240.0;
            let expect = (2.0 * std::f64::consts::PI * t).sin();
            assert!(
                (r.x[i] - expect).abs() < 1e-3,
                "sample {i}: {} vs {expect}",
                r.x[i]
            );
        }
    }

    #[test]
    fn one_hertz_sine_survives_upsampling_to_90() {
        let s = series(40.0, sine(40.0, 1.0, 60.0));
        let r = resample(&s, 90.0).unwrap();
        let n = r.len();
        for i in n / 20..n * 19 / 20 {
            let t = i as f64 / 90.0;
            let expect = (2.0 * std::f64::consts::PI * t).sin();
            assert!(
                (r.x[i] - expect).abs() < 1e-3,
                "sample {i}: {} vs {expect}",
                r.x[i]
            );
        }
    }

    #[test]
    fn resampling_is_linear_in_the_input() {
        let base = sine(40.0, 2.3, 20.0);
        let scaled: Vec<f64> = base.iter().map(|v| v * 3.25).collect();
        let r1 = resample(&series(40.0, base), 240.0).unwrap();
        let r2 = resample(&series(40.0, scaled), 240.0).unwrap();
        for i in 0..r1.len() {
            assert!(
                (r2.x[i] - 3.25 * r1.x[i]).abs() <= 1e-12 * r1.x[i].abs().max(1.0),
                "sample {i}"
            );
        }
    }

    #[test]
    fn band_limited_rms_is_preserved() {
        // energy below 10 Hz, well inside both Nyquist limits
        let rate = 40.0;
        let n = (rate * 60.0) as usize;
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / rate;
                let tau = 2.0 * std::f64::consts::PI;
                (tau * 1.0 * t).sin() + 0.5 * (tau * 4.3 * t).sin() + 0.25 * (tau * 8.9 * t).cos()
            })
            .collect();
        let rms_in = (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt();
        for target in [90.0, 240.0] {
            let r = resample(&series(rate, x.clone()), target).unwrap();
            let rms_out =
                (r.x.iter().map(|v| v * v).sum::<f64>() / r.x.len() as f64).sqrt();
            let rel = (rms_out - rms_in).abs() / rms_in;
            assert!(rel < 5e-3, "target {target}: rms drift {rel}");
        }
    }

    #[test]
    fn unsupported_rate_is_rejected() {
        let s = series(40.0, vec![0.0; 100]);
        assert!(matches!(
            resample(&s, 100.0),
            Err(SeismicError::UnsupportedRate(_))
        ));
    }

    #[test]
    fn integer_factor_outputs_hit_input_samples() {
        let x = sine(40.0, 1.0, 30.0);
        let r = resample(&series(40.0, x.clone()), 240.0).unwrap();
        // every 6th output lands exactly on an input position
        for (i, &v) in x.iter().enumerate().skip(40).take(x.len() - 80) {
            assert!((r.x[6 * i] - v).abs() < 1e-9, "input sample {i}");
        }
    }
}
