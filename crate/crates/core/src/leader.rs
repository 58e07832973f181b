//! Leader-side waveform synthesis: the frequency-hopped two-tone signal.
//!
//! The leader transmits two tones spaced `delta_f_hz` apart while the
//! pair's center hops over a configured set of RF frequencies. Hopping
//! happens in the baseband: each tone is a numerically controlled
//! oscillator whose frequency is retuned at hop boundaries while its phase
//! accumulator carries over, so tone phases are continuous across hops.
//! An optional mode re-randomizes the tone phases at every boundary to
//! model the worst-case discontinuity for transient studies.
//!
//! Both tones share one oscillator: their frequencies are scaled by the
//! same `(1 + ppm·1e-6 + drift·t·1e-6)` factor and they ride the same
//! phase-noise path, so the tone spacing tracks the leader clock exactly.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::buffer::{ComplexBuffer, C64};
use crate::error::{Error, Result};
use crate::osc::{oscillator_phase, OscillatorModel};
use crate::rng::Rng;

/// Soft-limiter setting for the power amplifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PaSaturation {
    /// Output magnitude asymptote of the tanh soft clip.
    pub output_ceiling: f64,
}

/// Tone phase behavior at hop boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HopPhaseMode {
    /// Phase accumulators persist across hops (baseband NCO retune).
    Continuous,
    /// Fresh uniform phases at every boundary (worst-case transient).
    Randomized,
}

/// Two-tone waveform parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TwoToneConfig {
    /// Tone spacing in Hz; this is the reference frequency being distributed.
    pub delta_f_hz: f64,
    /// Absolute RF frequency the complex baseband is centered on.
    pub sim_center_hz: f64,
    /// Amplitude of each tone.
    pub tone_amplitude: f64,
    /// Power amplifier gain in dB.
    pub pa_gain_db: f64,
    /// Optional PA soft clipping; linear gain when absent.
    pub pa_saturation: Option<PaSaturation>,
    /// Phase handling at hop boundaries.
    pub hop_phase: HopPhaseMode,
}

impl Default for TwoToneConfig {
    fn default() -> Self {
        TwoToneConfig {
            delta_f_hz: 10e6,
            sim_center_hz: 900e6,
            tone_amplitude: 1.0,
            pa_gain_db: 0.0,
            pa_saturation: None,
            hop_phase: HopPhaseMode::Continuous,
        }
    }
}

/// Hop pattern selector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HopPattern {
    /// Independent uniform draws per segment from the given seed. A null
    /// seed is filled in from the scenario master seed.
    Random { seed: Option<u64> },
    /// Cycles through the listed center indices.
    FixedSequence(Vec<usize>),
}

/// Hop schedule: center set, dwell, pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HopSchedule {
    /// Available center frequencies, absolute RF Hz.
    pub centers_hz: Vec<f64>,
    /// Dwell time per segment, seconds.
    pub dwell_s: f64,
    /// Segment-to-center assignment rule.
    pub pattern: HopPattern,
    /// Scheduled span; defaults to the scenario duration when absent.
    pub total_duration_s: Option<f64>,
}

impl Default for HopSchedule {
    fn default() -> Self {
        HopSchedule {
            centers_hz: vec![890e6, 895e6, 900e6, 905e6, 910e6],
            dwell_s: 1.0,
            pattern: HopPattern::Random { seed: None },
            total_duration_s: None,
        }
    }
}

/// One dwell of the hop sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopSegment {
    /// Segment start, seconds from capture start.
    pub start_s: f64,
    /// Center frequency for the dwell, absolute RF Hz.
    pub center_hz: f64,
}

/// Expands a schedule into `ceil(total/dwell)` dwell segments.
///
/// Random patterns draw `index = rng.next_u64() mod centers.len()`
/// independently per segment; `rng` must already be seeded per the
/// schedule's `pattern.seed`. Fixed sequences cycle their index list and
/// leave `rng` untouched.
pub fn generate_hop_sequence(schedule: &HopSchedule, rng: &mut Rng) -> Result<Vec<HopSegment>> {
    if schedule.centers_hz.is_empty() {
        return Err(Error::config("hops.centers_hz", "centers list is empty"));
    }
    if !(schedule.dwell_s > 0.0) {
        return Err(Error::config("hops.dwell_s", "dwell must be positive"));
    }
    let total = schedule.total_duration_s.ok_or_else(|| {
        Error::config("hops.total_duration_s", "total duration not resolved")
    })?;
    if total < schedule.dwell_s {
        return Err(Error::config(
            "hops.total_duration_s",
            format!("total {total} s shorter than one dwell {} s", schedule.dwell_s),
        ));
    }
    let n_segments = (total / schedule.dwell_s).ceil() as usize;
    let n_centers = schedule.centers_hz.len() as u64;
    let mut segments = Vec::with_capacity(n_segments);
    for k in 0..n_segments {
        let idx = match &schedule.pattern {
            HopPattern::Random { .. } => (rng.next_u64() % n_centers) as usize,
            HopPattern::FixedSequence(seq) => {
                if seq.is_empty() {
                    return Err(Error::config("hops.pattern", "fixed_sequence is empty"));
                }
                let i = seq[k % seq.len()];
                if i >= schedule.centers_hz.len() {
                    return Err(Error::config(
                        "hops.pattern",
                        format!("index {i} out of range for {} centers", schedule.centers_hz.len()),
                    ));
                }
                i
            }
        };
        segments.push(HopSegment {
            start_s: k as f64 * schedule.dwell_s,
            center_hz: schedule.centers_hz[idx],
        });
    }
    Ok(segments)
}

/// Hop instants (segment starts after the first) in seconds.
pub fn hop_instants(segments: &[HopSegment]) -> Vec<f64> {
    segments.iter().skip(1).map(|s| s.start_s).collect()
}

/// Synthesizes the hopped two-tone complex-baseband waveform.
///
/// Within each dwell the signal is
/// `A e^{j(θ1(t) + w(t))} + A e^{j(θ2(t) + w(t))}` where the tone
/// accumulators advance at `(center ± Δf/2 − sim_center) · scale(t)` and
/// `w` is the shared oscillator phase-noise path. The segment boundary for
/// a hop at time `t` is sample `floor(t · rate)`.
pub fn synthesize_two_tone(
    cfg: &TwoToneConfig,
    hops: &[HopSegment],
    total_duration_s: f64,
    leader_osc: &OscillatorModel,
    rate_hz: f64,
    rng: &mut Rng,
) -> Result<ComplexBuffer> {
    if hops.is_empty() {
        return Err(Error::config("hops", "empty hop sequence"));
    }
    for seg in hops {
        let offset = (seg.center_hz - cfg.sim_center_hz).abs();
        if offset + cfg.delta_f_hz / 2.0 >= rate_hz / 2.0 {
            return Err(Error::config(
                "two_tone",
                format!(
                    "center {} Hz puts a tone at offset {} Hz, beyond Nyquist {} Hz",
                    seg.center_hz,
                    offset + cfg.delta_f_hz / 2.0,
                    rate_hz / 2.0
                ),
            ));
        }
    }

    let n_total = (total_duration_s * rate_hz).round() as usize;
    let noise_path = oscillator_phase(leader_osc, n_total.max(1), rate_hz, rng);

    // Segment boundaries in samples: floor(t_hop * rate).
    let mut bounds: Vec<usize> = hops.iter().map(|s| (s.start_s * rate_hz) as usize).collect();
    bounds.push(n_total);

    let amp = cfg.tone_amplitude;
    let mut samples = Vec::with_capacity(n_total);
    let mut theta1 = 0.0_f64;
    let mut theta2 = 0.0_f64;
    let two_pi_dt = 2.0 * PI / rate_hz;

    for (seg_idx, seg) in hops.iter().enumerate() {
        let start = bounds[seg_idx].min(n_total);
        let end = bounds[seg_idx + 1].min(n_total);
        if seg_idx > 0 && cfg.hop_phase == HopPhaseMode::Randomized {
            theta1 = rng.next_f64() * 2.0 * PI;
            theta2 = rng.next_f64() * 2.0 * PI;
        }
        let offset = seg.center_hz - cfg.sim_center_hz;
        let f1 = offset - cfg.delta_f_hz / 2.0;
        let f2 = offset + cfg.delta_f_hz / 2.0;
        for n in start..end {
            let w = noise_path[n];
            let s = C64::from_polar(amp, theta1 + w) + C64::from_polar(amp, theta2 + w);
            samples.push(s);
            let scale = leader_osc.frequency_scale(n as f64 / rate_hz);
            theta1 += two_pi_dt * f1 * scale;
            theta2 += two_pi_dt * f2 * scale;
        }
    }

    Ok(ComplexBuffer::new(rate_hz, samples))
}

/// Applies the power amplifier: linear gain, then optional tanh soft clip
/// with phase preserved.
pub fn apply_pa(buffer: &ComplexBuffer, cfg: &TwoToneConfig) -> ComplexBuffer {
    let gain = 10f64.powf(cfg.pa_gain_db / 20.0);
    let samples = match cfg.pa_saturation {
        None => buffer.samples.iter().map(|&s| s * gain).collect(),
        Some(PaSaturation { output_ceiling }) => buffer
            .samples
            .iter()
            .map(|&s| {
                let m = s.norm() * gain;
                if m == 0.0 {
                    C64::new(0.0, 0.0)
                } else {
                    let clipped = output_ceiling * (m / output_ceiling).tanh();
                    s * (clipped / s.norm())
                }
            })
            .collect(),
    };
    buffer.with_samples(samples)
}
