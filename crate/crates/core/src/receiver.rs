//! Follower receive chain: reference extraction from the hopped two-tone
//! waveform.
//!
//! The chain is front band-pass filter → LNA → square-law self-mixing →
//! 10 MHz band-pass filter → AGC. No stage receives the hop schedule or
//! any other leader-side state; the tone spacing survives self-mixing as a
//! beat regardless of where the pair currently sits, which is the whole
//! trick. Hop instants ride along on the output purely as analysis
//! metadata.
//!
//! The splitter/combiner/mixer arrangement is modeled as an ideal squarer
//! with a flat conversion loss: for a passband signal
//! `x(t) = Re{s(t)e^{j2πf_c t}}`, squaring gives `½|s|² + ½Re{s²e^{j4πf_c t}}`
//! and the `2f_c` image is out of band, so the video output is exactly
//! `½·L·|s|²`.

use serde::{Deserialize, Serialize};

use crate::buffer::{ComplexBuffer, RealBuffer, C64};
use crate::error::{Error, Result};
use crate::fir::{self, FirFilter};
use crate::rng::Rng;

/// Front band-pass filter parameters (absolute RF band; realized at
/// baseband as a low-pass over the equivalent offset span).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrontBpfConfig {
    /// Band center, absolute RF Hz.
    pub center_hz: f64,
    /// Two-sided passband width, Hz.
    pub bw_hz: f64,
    pub num_taps: usize,
}

impl Default for FrontBpfConfig {
    fn default() -> Self {
        // Hop band 890–910 MHz widened by ±Δf/2: ±15 MHz about the center.
        FrontBpfConfig {
            center_hz: 900e6,
            bw_hz: 30e6,
            num_taps: 201,
        }
    }
}

/// Low-noise amplifier parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LnaConfig {
    pub gain_db: f64,
    pub noise_figure_db: f64,
}

impl Default for LnaConfig {
    fn default() -> Self {
        LnaConfig {
            gain_db: 20.0,
            noise_figure_db: 3.0,
        }
    }
}

/// Reference band-pass filter parameters (video domain, after mixing).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RefBpfConfig {
    /// Band center; must equal the scenario's nominal tone spacing.
    pub center_hz: f64,
    pub bw_hz: f64,
    pub num_taps: usize,
}

impl Default for RefBpfConfig {
    fn default() -> Self {
        // 9.5–11.5 MHz ceramic filter rounded to a 2 MHz band at 10 MHz.
        RefBpfConfig {
            center_hz: 10e6,
            bw_hz: 2e6,
            num_taps: 201,
        }
    }
}

/// AGC loop parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AgcConfig {
    pub target_rms: f64,
    /// Log-domain gain step per sample per unit of log-envelope error.
    pub loop_gain: f64,
    /// Time constant of the RMS envelope estimator, seconds.
    pub rms_time_constant_s: f64,
    /// Gain ceiling in dB; reached only on dead input.
    pub max_gain_db: f64,
}

impl Default for AgcConfig {
    fn default() -> Self {
        AgcConfig {
            target_rms: 1.0,
            loop_gain: 0.05,
            rms_time_constant_s: 1e-4,
            max_gain_db: 60.0,
        }
    }
}

/// Full follower chain configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReceiverChainConfig {
    pub front_bpf: FrontBpfConfig,
    pub lna: LnaConfig,
    pub mixer_loss_db: f64,
    pub ref_bpf: RefBpfConfig,
    pub agc: AgcConfig,
    /// Follower timebase error in ppm. Applied in analysis as a
    /// measurement-timebase scale, never in the signal path.
    pub follower_ppm: f64,
    /// Places the LNA ahead of the front filter when set.
    pub lna_first: bool,
}

impl Default for ReceiverChainConfig {
    fn default() -> Self {
        ReceiverChainConfig {
            front_bpf: FrontBpfConfig::default(),
            lna: LnaConfig::default(),
            mixer_loss_db: 6.0,
            ref_bpf: RefBpfConfig::default(),
            agc: AgcConfig::default(),
            follower_ppm: 0.0,
            lna_first: false,
        }
    }
}

/// The recovered sinusoidal reference clock of one follower.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedClock {
    /// Real-valued clock signal, dominant component in the reference band.
    pub signal: RealBuffer,
    /// Hop instants copied from the scenario for analysis gating only;
    /// the signal path never reads them.
    pub hop_instants_s: Vec<f64>,
    pub follower_id: usize,
    pub follower_ppm: f64,
    /// Set when the AGC hit its gain ceiling (dead input).
    pub agc_clamped: bool,
}

/// Designs the baseband realization of the front filter for `rate_hz`.
///
/// The configured RF band translates to offsets symmetric about zero, so
/// the realization is a low-pass whose −6 dB cutoff is pushed out by half
/// the Hamming transition width; the configured span then sees flat gain
/// and the stopband starts one transition width beyond it.
pub fn design_front_filter(cfg: &FrontBpfConfig, rate_hz: f64) -> Result<FirFilter> {
    let transition_hz = 3.3 * rate_hz / cfg.num_taps as f64;
    let cutoff = cfg.bw_hz / 2.0 + transition_hz / 2.0;
    if cutoff >= rate_hz / 2.0 {
        return Err(Error::config(
            "front_bpf.bw_hz",
            format!(
                "front band half-width {} Hz (plus transition) exceeds Nyquist {}",
                cutoff,
                rate_hz / 2.0
            ),
        ));
    }
    fir::design_lowpass(cutoff, cfg.num_taps, rate_hz)
}

/// Front stage: band limiting plus low-noise amplification.
///
/// The LNA adds white noise referred to its input with power
/// `(F - 1) · N₀ · rate` where `F = 10^(NF/10)` and `N₀` is the channel
/// noise density at the antenna, then applies its gain. Filter and LNA
/// order follows `cfg.lna_first`.
pub fn front_stage(
    rx: ComplexBuffer,
    cfg: &ReceiverChainConfig,
    input_noise_density: f64,
    rng: &mut Rng,
) -> Result<ComplexBuffer> {
    let filt = design_front_filter(&cfg.front_bpf, rx.rate_hz)?;
    let mut buf = rx;
    let apply_lna = |buf: &mut ComplexBuffer, rng: &mut Rng| {
        let gain = 10f64.powf(cfg.lna.gain_db / 20.0);
        let noise_factor = 10f64.powf(cfg.lna.noise_figure_db / 10.0);
        let added = (noise_factor - 1.0) * input_noise_density.max(0.0) * buf.rate_hz;
        if added > 0.0 {
            let sigma = (added / 2.0).sqrt();
            for s in &mut buf.samples {
                let (a, b) = rng.next_gaussian_pair();
                *s = (*s + C64::new(sigma * a, sigma * b)) * gain;
            }
        } else if gain != 1.0 {
            for s in &mut buf.samples {
                *s = *s * gain;
            }
        }
    };
    if cfg.lna_first {
        apply_lna(&mut buf, rng);
        fir::filter_in_place(&mut buf, &filt)?;
    } else {
        fir::filter_in_place(&mut buf, &filt)?;
        apply_lna(&mut buf, rng);
    }
    Ok(buf)
}

/// Square-law self-mixing: `y[n] = ½ · L · |s[n]|²` with
/// `L = 10^(-mixer_loss_db/10)`.
///
/// Output is a real buffer at the same rate containing DC plus the tone
/// beats (and cross terms with any interferer).
pub fn square_law_mix(x: &ComplexBuffer, mixer_loss_db: f64) -> RealBuffer {
    let loss = 10f64.powf(-mixer_loss_db / 10.0);
    let samples = x.samples.iter().map(|s| 0.5 * loss * s.norm_sqr()).collect();
    x.with_samples(samples)
}

/// Reference band-pass stage: isolates the beat at the tone spacing,
/// rejecting DC and out-of-band products.
pub fn ref_stage(y: RealBuffer, cfg: &ReceiverChainConfig) -> Result<RealBuffer> {
    let filt = fir::design_bandpass(
        cfg.ref_bpf.center_hz,
        cfg.ref_bpf.bw_hz,
        cfg.ref_bpf.num_taps,
        y.rate_hz,
    )?;
    let mut buf = y;
    fir::filter_in_place(&mut buf, &filt)?;
    Ok(buf)
}

/// AGC status returned alongside the stabilized signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgcInfo {
    /// True when the gain ceiling was reached (e.g. all-zero input).
    pub clamped: bool,
    pub final_gain: f64,
}

/// Automatic gain control: log-domain per-sample loop.
///
/// The loop tracks the RMS of its own output with a single-pole estimator
/// (`α = 1/(rate · rms_time_constant)`) and multiplies the gain by
/// `exp(loop_gain · (ln target − ln rms))` each sample. Gain is clamped at
/// `max_gain_db`; hitting the clamp is flagged, not fatal.
pub fn agc(z: RealBuffer, cfg: &AgcConfig) -> (RealBuffer, AgcInfo) {
    let alpha = (1.0 / (z.rate_hz * cfg.rms_time_constant_s)).min(1.0);
    let target = cfg.target_rms;
    let ln_target = target.ln();
    let floor = target * 1e-9;
    let g_max = 10f64.powf(cfg.max_gain_db / 20.0);
    let mut buf = z;
    let mut rms_sq = target * target; // start at equilibrium
    let mut gain = 1.0_f64;
    let mut clamped = false;
    for s in &mut buf.samples {
        let measured = gain * *s;
        rms_sq = (1.0 - alpha) * rms_sq + alpha * measured * measured;
        let rms = rms_sq.sqrt().max(floor);
        gain *= (cfg.loop_gain * (ln_target - rms.ln())).exp();
        if gain >= g_max {
            gain = g_max;
            clamped = true;
        }
        *s *= gain;
    }
    let info = AgcInfo {
        clamped,
        final_gain: gain,
    };
    (buf, info)
}

/// Runs the full extraction chain on one received buffer.
///
/// Composition is front stage → square-law mixer → reference filter → AGC.
/// The hop schedule is not an input to any stage; `hop_instants_s` is
/// attached to the result purely so analysis can gate transients.
pub fn extract_reference(
    rx: ComplexBuffer,
    cfg: &ReceiverChainConfig,
    hop_instants_s: &[f64],
    follower_id: usize,
    input_noise_density: f64,
    rng: &mut Rng,
) -> Result<ExtractedClock> {
    let fronted = front_stage(rx, cfg, input_noise_density, rng)
        .map_err(|e| e.with_context(&format!("stage=front follower={follower_id}")))?;
    let mixed = square_law_mix(&fronted, cfg.mixer_loss_db);
    drop(fronted);
    let refd = ref_stage(mixed, cfg)
        .map_err(|e| e.with_context(&format!("stage=ref follower={follower_id}")))?;
    let (signal, agc_info) = agc(refd, &cfg.agc);
    Ok(ExtractedClock {
        signal,
        hop_instants_s: hop_instants_s.to_vec(),
        follower_id,
        follower_ppm: cfg.follower_ppm,
        agc_clamped: agc_info.clamped,
    })
}

/// Comparator with symmetric hysteresis: output is ±1, switching high when
/// the input exceeds `+hysteresis` and low when it falls below
/// `-hysteresis`.
pub fn to_square_wave(clk: &ExtractedClock, hysteresis: f64) -> Result<RealBuffer> {
    let rms = clk.signal.settled_rms();
    if !(hysteresis > 0.0) || hysteresis >= rms {
        return Err(Error::config(
            "hysteresis",
            format!("hysteresis {hysteresis} must be positive and below signal RMS {rms}"),
        ));
    }
    let mut state = if clk.signal.samples.first().copied().unwrap_or(0.0) > hysteresis {
        1.0
    } else {
        -1.0
    };
    let samples = clk
        .signal
        .samples
        .iter()
        .map(|&x| {
            if x > hysteresis {
                state = 1.0;
            } else if x < -hysteresis {
                state = -1.0;
            }
            state
        })
        .collect();
    Ok(clk.signal.with_samples(samples))
}

/// Rising-edge count of a ±1 square wave.
pub fn rising_edges(square: &RealBuffer) -> usize {
    square
        .samples
        .windows(2)
        .filter(|w| w[0] < 0.0 && w[1] > 0.0)
        .count()
}
