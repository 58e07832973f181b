//! Clock-source model: fractional frequency error, drift, and random-walk
//! phase noise.
//!
//! An oscillator is described by its ppm offset, a linear drift in ppm/s,
//! a Wiener phase-noise diffusion rate, and an initial phase. Deterministic
//! effects (offset and drift) enter through [`OscillatorModel::frequency_scale`],
//! which callers apply to every nominal frequency they synthesize — all
//! frequencies derived from one oscillator scale by the same factor, so
//! tone spacing scales exactly with the offset. The stochastic part,
//! `phi_0 + w(t)`, comes from [`oscillator_phase`].

use serde::{Deserialize, Serialize};

use crate::rng::Rng;

/// Imperfections of one clock source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OscillatorModel {
    /// Fractional frequency error in parts per million.
    pub ppm_offset: f64,
    /// Linear drift of the fractional error, ppm per second.
    pub drift_ppm_per_s: f64,
    /// Variance rate of the Wiener phase process, rad²/s. Zero disables
    /// phase noise entirely (no RNG draws are made).
    pub phase_noise_diffusion: f64,
    /// Initial phase φ₀ in radians.
    pub initial_phase_rad: f64,
}

impl Default for OscillatorModel {
    fn default() -> Self {
        OscillatorModel {
            ppm_offset: 0.0,
            drift_ppm_per_s: 0.0,
            phase_noise_diffusion: 0.0,
            initial_phase_rad: 0.0,
        }
    }
}

impl OscillatorModel {
    /// Instantaneous frequency multiplier at elapsed time `t`:
    /// `1 + 1e-6 * (ppm_offset + drift_ppm_per_s * t)`.
    ///
    /// Two frequencies synthesized from the same oscillator keep their
    /// exact ratio because both are multiplied by this common factor.
    pub fn frequency_scale(&self, t_s: f64) -> f64 {
        1.0 + 1e-6 * (self.ppm_offset + self.drift_ppm_per_s * t_s)
    }
}

/// Generates the stochastic phase path `φ₀ + w(t)` at `rate_hz`.
///
/// `w` is a Wiener process: increments are i.i.d. Gaussian with variance
/// `phase_noise_diffusion / rate_hz`, and `w(0) = 0` so the first sample
/// is exactly `φ₀`. With zero diffusion the output is the constant `φ₀`
/// and `rng` is untouched.
pub fn oscillator_phase(
    model: &OscillatorModel,
    n_samples: usize,
    rate_hz: f64,
    rng: &mut Rng,
) -> Vec<f64> {
    assert!(n_samples >= 1, "n_samples must be at least 1");
    if model.phase_noise_diffusion == 0.0 {
        return vec![model.initial_phase_rad; n_samples];
    }
    let sigma = (model.phase_noise_diffusion / rate_hz).sqrt();
    let mut increments = vec![0.0; n_samples - 1];
    rng.fill_gaussian(&mut increments);
    let mut out = Vec::with_capacity(n_samples);
    let mut phase = model.initial_phase_rad;
    out.push(phase);
    for g in increments {
        phase += sigma * g;
        out.push(phase);
    }
    out
}
