//! Windowed-sinc FIR filter design and filtering.
//!
//! All filters in the receive chain are linear-phase FIRs designed with a
//! Hamming window. Band-pass filters are built as the difference of two
//! low-pass prototypes (one per band edge) and then scaled for exactly
//! unity gain at the design center; low-pass filters are scaled for unity
//! DC gain. Odd tap counts keep the taps symmetric so the group delay is
//! exactly `(num_taps - 1) / (2 * rate)`.
//!
//! Filtering uses zero-prepended history: the output has the same length
//! and start time as the input, and the first `num_taps - 1` samples are
//! marked as a settling prefix for analysis to gate.

use std::f64::consts::PI;

use crate::buffer::{Sample, SampleBuffer};
use crate::error::{Error, Result};

/// Linear-phase FIR filter with real, symmetric taps.
#[derive(Debug, Clone, PartialEq)]
pub struct FirFilter {
    /// Symmetric tap vector, odd length.
    pub taps: Vec<f64>,
    /// Frequency the design was centered on (0 for low-pass), Hz.
    pub design_center_hz: f64,
    /// Design bandwidth, Hz (two-sided for band-pass, cutoff span for low-pass).
    pub design_bw_hz: f64,
    /// Sample rate the taps were designed for, Hz.
    pub rate_hz: f64,
}

impl FirFilter {
    /// Group delay in samples: `(len - 1) / 2`.
    pub fn group_delay_samples(&self) -> usize {
        (self.taps.len() - 1) / 2
    }

    /// Group delay in seconds: `(len - 1) / (2 * rate)`.
    pub fn group_delay_s(&self) -> f64 {
        (self.taps.len() - 1) as f64 / (2.0 * self.rate_hz)
    }

    /// Discrete-time frequency response `H(f) = sum taps[k] e^{-j2πfk/rate}`.
    pub fn frequency_response(&self, freq_hz: f64) -> num_complex::Complex<f64> {
        let mut acc = num_complex::Complex::new(0.0, 0.0);
        for (k, &t) in self.taps.iter().enumerate() {
            let ph = -2.0 * PI * freq_hz * k as f64 / self.rate_hz;
            acc += num_complex::Complex::from_polar(t, ph);
        }
        acc
    }

    /// Magnitude response in dB at `freq_hz`.
    pub fn magnitude_db(&self, freq_hz: f64) -> f64 {
        20.0 * self.frequency_response(freq_hz).norm().log10()
    }
}

fn check_taps(num_taps: usize) -> Result<()> {
    if num_taps % 2 == 0 {
        return Err(Error::config(
            "num_taps",
            format!("must be odd, got {num_taps}"),
        ));
    }
    if num_taps < 11 {
        return Err(Error::config(
            "num_taps",
            format!("must be at least 11, got {num_taps}"),
        ));
    }
    Ok(())
}

/// Unwindowed low-pass sinc prototype with cutoff `fc` (−6 dB point).
fn sinc_prototype(fc_hz: f64, num_taps: usize, rate_hz: f64) -> Vec<f64> {
    let mid = (num_taps - 1) as f64 / 2.0;
    let nu = fc_hz / rate_hz;
    (0..num_taps)
        .map(|i| {
            let k = i as f64 - mid;
            if k == 0.0 {
                2.0 * nu
            } else {
                (2.0 * PI * nu * k).sin() / (PI * k)
            }
        })
        .collect()
}

fn hamming(num_taps: usize) -> Vec<f64> {
    let nm1 = (num_taps - 1) as f64;
    (0..num_taps)
        .map(|i| 0.54 - 0.46 * (2.0 * PI * i as f64 / nm1).cos())
        .collect()
}

/// Designs a Hamming windowed-sinc band-pass filter.
///
/// The passband is `[center - bw/2, center + bw/2]`; gain at `center_hz`
/// is normalized to exactly unity. Stopband rejection is 40 dB or better
/// one bandwidth away from center for `num_taps >= 201` at 40 MS/s.
pub fn design_bandpass(
    center_hz: f64,
    bw_hz: f64,
    num_taps: usize,
    rate_hz: f64,
) -> Result<FirFilter> {
    check_taps(num_taps)?;
    if bw_hz <= 0.0 || rate_hz <= 0.0 {
        return Err(Error::config("bw_hz", "bandwidth and rate must be positive"));
    }
    let lo = center_hz - bw_hz / 2.0;
    let hi = center_hz + bw_hz / 2.0;
    if lo <= 0.0 {
        return Err(Error::config(
            "center_hz",
            format!("lower band edge {lo} Hz must be above DC"),
        ));
    }
    if hi >= rate_hz / 2.0 {
        return Err(Error::config(
            "center_hz",
            format!("upper band edge {hi} Hz exceeds Nyquist {}", rate_hz / 2.0),
        ));
    }

    let lp_hi = sinc_prototype(hi, num_taps, rate_hz);
    let lp_lo = sinc_prototype(lo, num_taps, rate_hz);
    let window = hamming(num_taps);
    let mut taps: Vec<f64> = (0..num_taps)
        .map(|i| (lp_hi[i] - lp_lo[i]) * window[i])
        .collect();

    // Symmetric taps: |H(center)| equals the cosine-sum amplitude, so a
    // real scale factor pins the center gain without breaking symmetry.
    let mut filt = FirFilter {
        taps: taps.clone(),
        design_center_hz: center_hz,
        design_bw_hz: bw_hz,
        rate_hz,
    };
    let gain = filt.frequency_response(center_hz).norm();
    for t in &mut taps {
        *t /= gain;
    }
    filt.taps = taps;
    Ok(filt)
}

/// Designs a Hamming windowed-sinc low-pass filter with unity DC gain.
///
/// `cutoff_hz` is the −6 dB point. Used for the front stage (a band
/// symmetric about baseband zero) and for phase-demodulation smoothing.
pub fn design_lowpass(cutoff_hz: f64, num_taps: usize, rate_hz: f64) -> Result<FirFilter> {
    check_taps(num_taps)?;
    if cutoff_hz <= 0.0 || cutoff_hz >= rate_hz / 2.0 {
        return Err(Error::config(
            "cutoff_hz",
            format!("cutoff {cutoff_hz} Hz must lie in (0, Nyquist)"),
        ));
    }
    let window = hamming(num_taps);
    let mut taps: Vec<f64> = sinc_prototype(cutoff_hz, num_taps, rate_hz)
        .iter()
        .zip(&window)
        .map(|(s, w)| s * w)
        .collect();
    let dc: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= dc;
    }
    Ok(FirFilter {
        taps,
        design_center_hz: 0.0,
        design_bw_hz: 2.0 * cutoff_hz,
        rate_hz,
    })
}

/// Applies `filt` to `buffer` with zero-prepended history.
///
/// `output[n] = sum_k taps[k] * input[n-k]`, same length and start time as
/// the input; the settle prefix grows by `num_taps - 1`.
pub fn filter<T: Sample>(buffer: &SampleBuffer<T>, filt: &FirFilter) -> Result<SampleBuffer<T>> {
    if buffer.rate_hz != filt.rate_hz {
        return Err(Error::config(
            "rate_hz",
            format!(
                "buffer rate {} does not match filter design rate {}",
                buffer.rate_hz, filt.rate_hz
            ),
        ));
    }
    let x = &buffer.samples;
    let taps = &filt.taps;
    let mut y = vec![T::ZERO; x.len()];
    convolve_into(x, taps, &mut y);
    let mut out = buffer.with_samples(y);
    out.settle_prefix = buffer.settle_prefix + (taps.len() - 1);
    Ok(out)
}

/// In-place variant of [`filter`]: the buffer's samples are overwritten
/// with the filtered signal. Used by the receive chain to keep peak memory
/// at one buffer per stage for long captures.
pub fn filter_in_place<T: Sample>(buffer: &mut SampleBuffer<T>, filt: &FirFilter) -> Result<()> {
    if buffer.rate_hz != filt.rate_hz {
        return Err(Error::config(
            "rate_hz",
            format!(
                "buffer rate {} does not match filter design rate {}",
                buffer.rate_hz, filt.rate_hz
            ),
        ));
    }
    let taps = &filt.taps;
    let n_taps = taps.len();
    let x = &mut buffer.samples;
    if x.is_empty() {
        return Ok(());
    }
    // Block processing: each block's input samples are staged in a scratch
    // vector (together with the carried input history) before the output
    // overwrites them, so the inner loop stays linear and vectorizable.
    const BLOCK: usize = 1 << 15;
    let mut history = vec![T::ZERO; n_taps - 1];
    let mut scratch = vec![T::ZERO; BLOCK + n_taps - 1];
    let mut start = 0usize;
    while start < x.len() {
        let end = (start + BLOCK).min(x.len());
        let len = end - start;
        scratch[..n_taps - 1].copy_from_slice(&history);
        scratch[n_taps - 1..n_taps - 1 + len].copy_from_slice(&x[start..end]);
        history.copy_from_slice(&scratch[len..len + n_taps - 1]);
        for n in 0..len {
            let window = &scratch[n..n + n_taps];
            let mut acc = T::ZERO;
            for (k, &t) in taps.iter().enumerate() {
                acc += window[n_taps - 1 - k] * t;
            }
            x[start + n] = acc;
        }
        start = end;
    }
    buffer.settle_prefix += n_taps - 1;
    Ok(())
}

fn convolve_into<T: Sample>(x: &[T], taps: &[f64], y: &mut [T]) {
    let n_taps = taps.len();
    for n in 0..x.len() {
        let k_max = n_taps.min(n + 1);
        let mut acc = T::ZERO;
        for k in 0..k_max {
            acc += x[n - k] * taps[k];
        }
        y[n] = acc;
    }
}
