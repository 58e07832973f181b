//! Welch-style averaged periodogram for the exported spectrum artifacts.
//!
//! Layout is fixed so plots are reproducible bit for bit: 8 Hann-windowed
//! segments spread evenly across the capture. Segment length is
//! `min(65536, floor(2·len/9))`, which makes the eight segments overlap by
//! exactly 50% when they tile the signal and spread further apart on
//! longer captures. Density normalization matches the usual one-sided PSD
//! convention (`power/Hz`).

use num_complex::Complex;
use rustfft::FftPlanner;

/// Number of averaged segments.
pub const WELCH_SEGMENTS: usize = 8;
/// Cap on the segment length (keeps artifact files bounded).
pub const WELCH_MAX_NPERSEG: usize = 65_536;

/// One-sided Welch PSD of a real signal. Returns `(freqs_hz, psd)`.
pub fn welch_psd(x: &[f64], rate_hz: f64) -> (Vec<f64>, Vec<f64>) {
    if x.len() < 16 {
        return (Vec::new(), Vec::new());
    }
    let nperseg = (2 * x.len() / (WELCH_SEGMENTS + 1))
        .min(WELCH_MAX_NPERSEG)
        .max(16)
        .min(x.len());
    let window: Vec<f64> = {
        let nm1 = (nperseg - 1) as f64;
        (0..nperseg)
            .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / nm1).cos())
            .collect()
    };
    let win_power: f64 = window.iter().map(|w| w * w).sum();
    let norm = 1.0 / (rate_hz * win_power);

    let n_segments = if x.len() == nperseg { 1 } else { WELCH_SEGMENTS };
    let stride = if n_segments > 1 {
        (x.len() - nperseg) as f64 / (n_segments - 1) as f64
    } else {
        0.0
    };

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(nperseg);
    let n_bins = nperseg / 2 + 1;
    let mut acc = vec![0.0_f64; n_bins];
    let mut buf = vec![Complex::new(0.0, 0.0); nperseg];
    for s in 0..n_segments {
        let start = (s as f64 * stride).round() as usize;
        for (i, b) in buf.iter_mut().enumerate() {
            *b = Complex::new(x[start + i] * window[i], 0.0);
        }
        fft.process(&mut buf);
        for (k, a) in acc.iter_mut().enumerate() {
            let mut p = buf[k].norm_sqr() * norm;
            if k != 0 && !(nperseg % 2 == 0 && k == nperseg / 2) {
                p *= 2.0;
            }
            *a += p;
        }
    }
    for a in &mut acc {
        *a /= n_segments as f64;
    }
    let freqs = (0..n_bins)
        .map(|k| k as f64 * rate_hz / nperseg as f64)
        .collect();
    (freqs, acc)
}

/// Two-sided Welch PSD of a complex signal, frequencies in
/// `[-rate/2, rate/2)` ascending. Returns `(freqs_hz, psd)`.
pub fn welch_psd_complex(x: &[Complex<f64>], rate_hz: f64) -> (Vec<f64>, Vec<f64>) {
    if x.len() < 16 {
        return (Vec::new(), Vec::new());
    }
    let nperseg = (2 * x.len() / (WELCH_SEGMENTS + 1))
        .min(WELCH_MAX_NPERSEG)
        .max(16)
        .min(x.len());
    let window: Vec<f64> = {
        let nm1 = (nperseg - 1) as f64;
        (0..nperseg)
            .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / nm1).cos())
            .collect()
    };
    let win_power: f64 = window.iter().map(|w| w * w).sum();
    let norm = 1.0 / (rate_hz * win_power);
    let n_segments = if x.len() == nperseg { 1 } else { WELCH_SEGMENTS };
    let stride = if n_segments > 1 {
        (x.len() - nperseg) as f64 / (n_segments - 1) as f64
    } else {
        0.0
    };
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(nperseg);
    let mut acc = vec![0.0_f64; nperseg];
    let mut buf = vec![Complex::new(0.0, 0.0); nperseg];
    for s in 0..n_segments {
        let start = (s as f64 * stride).round() as usize;
        for (i, b) in buf.iter_mut().enumerate() {
            *b = x[start + i] * window[i];
        }
        fft.process(&mut buf);
        for (k, a) in acc.iter_mut().enumerate() {
            *a += buf[k].norm_sqr() * norm;
        }
    }
    for a in &mut acc {
        *a /= n_segments as f64;
    }
    // Reorder to ascending frequency: negative half first.
    let half = nperseg / 2;
    let mut freqs = Vec::with_capacity(nperseg);
    let mut psd = Vec::with_capacity(nperseg);
    for k in half..nperseg {
        freqs.push((k as f64 - nperseg as f64) * rate_hz / nperseg as f64);
        psd.push(acc[k]);
    }
    for (k, &a) in acc.iter().enumerate().take(half) {
        freqs.push(k as f64 * rate_hz / nperseg as f64);
        psd.push(a);
    }
    (freqs, psd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn tone_power_recovered_from_psd_integral() {
        // A unit-amplitude real tone has power 0.5; integrating the PSD
        // must recover it within a few percent (Hann scalloping averaged
        // over segments).
        let rate = 1e6;
        let n = 1 << 16;
        let x: Vec<f64> = (0..n)
            .map(|i| (2.0 * PI * 12_345.0 * i as f64 / rate).cos())
            .collect();
        let (freqs, psd) = welch_psd(&x, rate);
        let df = freqs[1] - freqs[0];
        let total: f64 = psd.iter().sum::<f64>() * df;
        assert!(
            (total - 0.5).abs() < 0.05,
            "integrated PSD {total}, expected 0.5"
        );
    }

    #[test]
    fn peak_lands_on_tone_bin() {
        let rate = 1e6;
        let n = 1 << 15;
        let f0 = 100_000.0;
        let x: Vec<f64> = (0..n)
            .map(|i| (2.0 * PI * f0 * i as f64 / rate).cos())
            .collect();
        let (freqs, psd) = welch_psd(&x, rate);
        let peak = psd
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert!(
            (freqs[peak] - f0).abs() < 2.0 * (freqs[1] - freqs[0]),
            "peak at {} Hz",
            freqs[peak]
        );
    }

    #[test]
    fn complex_psd_distinguishes_sign() {
        let rate = 1e6;
        let n = 1 << 14;
        let x: Vec<Complex<f64>> = (0..n)
            .map(|i| Complex::from_polar(1.0, -2.0 * PI * 50_000.0 * i as f64 / rate))
            .collect();
        let (freqs, psd) = welch_psd_complex(&x, rate);
        let peak = psd
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert!(freqs[peak] < 0.0, "negative-frequency tone peaked at {}", freqs[peak]);
    }
}
