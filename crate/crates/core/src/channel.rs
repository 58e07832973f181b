//! Propagation from leader to followers: free-space path loss, additive
//! white Gaussian noise, and configurable interferers.
//!
//! The channel is flat (3 m line of sight over a 30 MHz span) and static.
//! Each follower receives the transmit waveform scaled by
//! `-(FSPL + extra_loss)` dB plus an independent complex AWGN stream drawn
//! from its own derived RNG sub-stream, so per-follower propagation can
//! run in parallel without changing results.
//!
//! Noise is specified either as a density (power per Hz across the
//! simulated band) or as a target SNR, defined as per-tone received power
//! over the noise power inside the reference filter bandwidth.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::buffer::{ComplexBuffer, C64};
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Noise specification: exactly one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSpec {
    /// No noise at all; the output is the scaled input exactly.
    Noiseless,
    /// One-sided noise power density in dBm/Hz (powers are unitless in the
    /// simulation; "dBm" fixes the log reference).
    Density { dbm_per_hz: f64 },
    /// Per-tone SNR in dB, measured against noise in the reference
    /// bandwidth at the follower antenna.
    Snr { snr_db: f64 },
}

/// Link parameters from leader to followers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelConfig {
    /// Leader-to-follower distance in meters.
    pub distance_m: f64,
    /// Carrier used for the FSPL evaluation, Hz.
    pub carrier_for_fspl_hz: f64,
    /// Additional fixed loss in dB.
    pub extra_loss_db: f64,
    /// Noise mode.
    pub noise: NoiseSpec,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            distance_m: 3.0,
            carrier_for_fspl_hz: 900e6,
            extra_loss_db: 0.0,
            noise: NoiseSpec::Snr { snr_db: 20.0 },
        }
    }
}

/// One interference source, described at the follower antenna.
///
/// `freq_hz` is absolute RF; `power_rel_db` is relative to one received
/// signal tone (J/S per tone); `phase_seed` fixes the starting phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Interferer {
    /// Continuous-wave tone.
    Cw {
        freq_hz: f64,
        power_rel_db: f64,
        #[serde(default)]
        phase_seed: u64,
    },
    /// Linear frequency sweep starting at `freq_hz`.
    Swept {
        freq_hz: f64,
        power_rel_db: f64,
        sweep_rate_hz_per_s: f64,
        #[serde(default)]
        phase_seed: u64,
    },
    /// CW gated on for `duty_cycle` of each `period_s`.
    PulsedCw {
        freq_hz: f64,
        power_rel_db: f64,
        duty_cycle: f64,
        period_s: f64,
        #[serde(default)]
        phase_seed: u64,
    },
}

impl Interferer {
    pub fn freq_hz(&self) -> f64 {
        match *self {
            Interferer::Cw { freq_hz, .. }
            | Interferer::Swept { freq_hz, .. }
            | Interferer::PulsedCw { freq_hz, .. } => freq_hz,
        }
    }

    pub fn power_rel_db(&self) -> f64 {
        match *self {
            Interferer::Cw { power_rel_db, .. }
            | Interferer::Swept { power_rel_db, .. }
            | Interferer::PulsedCw { power_rel_db, .. } => power_rel_db,
        }
    }

    pub fn phase_seed(&self) -> u64 {
        match *self {
            Interferer::Cw { phase_seed, .. }
            | Interferer::Swept { phase_seed, .. }
            | Interferer::PulsedCw { phase_seed, .. } => phase_seed,
        }
    }
}

/// Free-space path loss `20·log10(4π·d·f/c)` in dB.
pub fn fspl_db(distance_m: f64, freq_hz: f64) -> f64 {
    20.0 * (4.0 * PI * distance_m * freq_hz / SPEED_OF_LIGHT).log10()
}

/// Linear amplitude scale applied by the channel.
pub fn channel_amplitude_scale(cfg: &ChannelConfig) -> f64 {
    let loss_db = fspl_db(cfg.distance_m, cfg.carrier_for_fspl_hz) + cfg.extra_loss_db;
    10f64.powf(-loss_db / 20.0)
}

/// Total complex noise power (variance) the channel adds at `rate_hz`.
///
/// `rx_tone_power` is the per-tone signal power at the follower antenna
/// (after path loss); `snr_ref_bw_hz` is the reference-filter bandwidth
/// that the SNR definition integrates noise over.
pub fn noise_power(
    cfg: &ChannelConfig,
    rx_tone_power: f64,
    rate_hz: f64,
    snr_ref_bw_hz: f64,
) -> f64 {
    match cfg.noise {
        NoiseSpec::Noiseless => 0.0,
        NoiseSpec::Density { dbm_per_hz } => 10f64.powf(dbm_per_hz / 10.0) * rate_hz,
        NoiseSpec::Snr { snr_db } => {
            let density = rx_tone_power / (10f64.powf(snr_db / 10.0) * snr_ref_bw_hz);
            density * rate_hz
        }
    }
}

/// Propagates `tx` to one follower: path-loss scaling plus AWGN from the
/// follower's own noise stream.
pub fn propagate_one(
    tx: &ComplexBuffer,
    cfg: &ChannelConfig,
    snr_ref_bw_hz: f64,
    rng: &mut Rng,
) -> ComplexBuffer {
    let scale = channel_amplitude_scale(cfg);
    // Two equal tones: mean |s|^2 is twice the per-tone power (the cross
    // term averages out), so per-tone received power is half the scaled
    // mean power.
    let rx_tone_power = scale * scale * tx.mean_power() / 2.0;
    let total_noise = noise_power(cfg, rx_tone_power, tx.rate_hz, snr_ref_bw_hz);
    let mut out = tx.with_samples(tx.samples.iter().map(|&s| s * scale).collect());
    if total_noise > 0.0 {
        let sigma = (total_noise / 2.0).sqrt();
        for s in &mut out.samples {
            let (a, b) = rng.next_gaussian_pair();
            *s += C64::new(sigma * a, sigma * b);
        }
    }
    out
}

/// Propagates `tx` to `n_followers` receivers with independent noise
/// streams derived from `master_seed` (labels `follower-<i>-noise`).
pub fn propagate(
    tx: &ComplexBuffer,
    cfg: &ChannelConfig,
    n_followers: usize,
    snr_ref_bw_hz: f64,
    master_seed: u64,
) -> Vec<ComplexBuffer> {
    (0..n_followers)
        .map(|i| {
            let mut rng = Rng::from_label(master_seed, &format!("follower-{i}-noise"));
            propagate_one(tx, cfg, snr_ref_bw_hz, &mut rng)
        })
        .collect()
}

/// Adds one interferer to a received buffer.
///
/// The interferer appears at baseband offset `freq_hz - sim_center_hz`
/// with amplitude `ref_tone_amplitude · 10^(power_rel_db/20)`; its start
/// phase comes from `phase_seed`. Swept interferers advance their
/// frequency linearly over the buffer; pulsed ones gate the amplitude by
/// the duty cycle.
pub fn add_interferer(
    rx: &ComplexBuffer,
    intf: &Interferer,
    sim_center_hz: f64,
    ref_tone_amplitude: f64,
) -> Result<ComplexBuffer> {
    let offset = intf.freq_hz() - sim_center_hz;
    let nyquist = rx.rate_hz / 2.0;
    if offset.abs() >= nyquist {
        return Err(Error::config(
            "interferer.freq_hz",
            format!("baseband offset {offset} Hz is outside Nyquist ±{nyquist} Hz"),
        ));
    }
    if let Interferer::Swept { sweep_rate_hz_per_s, .. } = *intf {
        let end_offset = offset + sweep_rate_hz_per_s * rx.duration_s();
        if end_offset.abs() >= nyquist {
            return Err(Error::config(
                "interferer.sweep_rate_hz_per_s",
                format!("sweep ends at offset {end_offset} Hz, outside Nyquist"),
            ));
        }
    }
    if let Interferer::PulsedCw { duty_cycle, period_s, .. } = *intf {
        if !(0.0..=1.0).contains(&duty_cycle) || period_s <= 0.0 {
            return Err(Error::config(
                "interferer.duty_cycle",
                "duty cycle must be in [0,1] with positive period",
            ));
        }
    }

    let amp = ref_tone_amplitude * 10f64.powf(intf.power_rel_db() / 20.0);
    if amp == 0.0 {
        return Ok(rx.clone());
    }
    let phase0 = Rng::new(intf.phase_seed()).next_f64() * 2.0 * PI;
    let dt = 1.0 / rx.rate_hz;
    let mut samples = rx.samples.clone();
    let mut phase = phase0;
    for (n, s) in samples.iter_mut().enumerate() {
        let t = n as f64 * dt;
        let gated_amp = match *intf {
            Interferer::PulsedCw { duty_cycle, period_s, .. } => {
                if (t % period_s) < duty_cycle * period_s {
                    amp
                } else {
                    0.0
                }
            }
            _ => amp,
        };
        if gated_amp != 0.0 {
            *s += C64::from_polar(gated_amp, phase);
        }
        let inst_freq = match *intf {
            Interferer::Swept { sweep_rate_hz_per_s, .. } => {
                offset + sweep_rate_hz_per_s * t
            }
            _ => offset,
        };
        phase += 2.0 * PI * inst_freq * dt;
    }
    Ok(rx.with_samples(samples))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_tone_tx(n: usize) -> ComplexBuffer {
        let samples: Vec<C64> = (0..n)
            .map(|i| {
                let t = i as f64 / 40e6;
                C64::from_polar(1.0, 2.0 * PI * 5e6 * t)
                    + C64::from_polar(1.0, -2.0 * PI * 5e6 * t)
            })
            .collect();
        ComplexBuffer::new(40e6, samples)
    }

    #[test]
    fn fspl_three_meters_900_mhz() {
        let loss = fspl_db(3.0, 900e6);
        assert!(
            (loss - 41.08).abs() < 0.01,
            "FSPL {loss} dB, expected 41.08 dB"
        );
    }

    #[test]
    fn noiseless_mode_is_exact_scaling() {
        let cfg = ChannelConfig {
            noise: NoiseSpec::Noiseless,
            ..Default::default()
        };
        let tx = two_tone_tx(1000);
        let out = propagate_one(&tx, &cfg, 2e6, &mut Rng::new(5));
        let scale = channel_amplitude_scale(&cfg);
        for (o, i) in out.samples.iter().zip(&tx.samples) {
            assert_eq!(*o, *i * scale);
        }
    }

    #[test]
    fn followers_get_distinct_but_reproducible_noise() {
        let cfg = ChannelConfig::default();
        let tx = two_tone_tx(256);
        let a = propagate(&tx, &cfg, 2, 2e6, 99);
        let b = propagate(&tx, &cfg, 2, 2e6, 99);
        assert_ne!(a[0].samples, a[1].samples, "streams must differ");
        assert_eq!(a[0].samples, b[0].samples, "rerun must reproduce");
        assert_eq!(a[1].samples, b[1].samples);
    }

    #[test]
    fn noise_power_matches_density() {
        // Full simulated band is a B-Hz band with B = rate: measured power
        // must equal density + 10·log10(B) within 0.2 dB.
        let density_db = -60.0;
        let cfg = ChannelConfig {
            noise: NoiseSpec::Density { dbm_per_hz: density_db },
            extra_loss_db: -fspl_db(3.0, 900e6), // unity channel gain
            ..Default::default()
        };
        let n = 1 << 20;
        let tx = ComplexBuffer::new(40e6, vec![C64::new(0.0, 0.0); n]);
        let out = propagate_one(&tx, &cfg, 2e6, &mut Rng::new(21));
        let measured_db = 10.0 * out.mean_power().log10();
        let expected_db = density_db + 10.0 * 40e6f64.log10();
        assert!(
            (measured_db - expected_db).abs() < 0.2,
            "noise power {measured_db} dB vs expected {expected_db} dB"
        );
    }

    #[test]
    fn snr_mode_self_consistent() {
        let snr_db = 20.0;
        let cfg = ChannelConfig {
            noise: NoiseSpec::Snr { snr_db },
            ..Default::default()
        };
        let ref_bw = 2e6;
        let n = 1 << 20;
        let tx = two_tone_tx(n);
        let rate = tx.rate_hz;
        let mut rng = Rng::new(13);
        let out = propagate_one(&tx, &cfg, ref_bw, &mut rng);
        // Noise realization = out - scaled tx (AWGN is additive).
        let scale = channel_amplitude_scale(&cfg);
        let mut noise_sum = 0.0;
        for (o, i) in out.samples.iter().zip(&tx.samples) {
            noise_sum += (o - i * scale).norm_sqr();
        }
        let noise_density = noise_sum / n as f64 / rate;
        let tone_power = scale * scale * tx.mean_power() / 2.0;
        let measured_snr = 10.0 * (tone_power / (noise_density * ref_bw)).log10();
        assert!(
            (measured_snr - snr_db).abs() < 0.3,
            "measured SNR {measured_snr} dB vs target {snr_db} dB"
        );
    }

    #[test]
    fn silent_interferer_is_identity() {
        let tx = two_tone_tx(128);
        let intf = Interferer::Cw {
            freq_hz: 905e6,
            power_rel_db: f64::NEG_INFINITY,
            phase_seed: 0,
        };
        let out = add_interferer(&tx, &intf, 900e6, 1.0).unwrap();
        assert_eq!(out.samples, tx.samples);
    }

    #[test]
    fn cw_interferer_adds_expected_tone() {
        let n = 4096;
        let rx = ComplexBuffer::new(40e6, vec![C64::new(0.0, 0.0); n]);
        let intf = Interferer::Cw {
            freq_hz: 905e6,
            power_rel_db: 0.0,
            phase_seed: 3,
        };
        let ref_amp = 0.123;
        let out = add_interferer(&rx, &intf, 900e6, ref_amp).unwrap();
        // Amplitude equals one tone's received amplitude at 0 dB J/S.
        for s in &out.samples {
            assert!((s.norm() - ref_amp).abs() < 1e-12);
        }
        // Frequency is +5 MHz baseband: conjugate-product discriminator.
        let rate = 40e6;
        for k in 1..n {
            let prod = out.samples[k] * out.samples[k - 1].conj();
            let f = prod.arg() * rate / (2.0 * PI);
            assert!((f - 5e6).abs() < 1.0, "instantaneous freq {f}");
        }
    }

    #[test]
    fn swept_interferer_rate_via_short_time_dft() {
        // 890→910 MHz in 0.1 s = 200 MHz/s; estimate instantaneous
        // frequency over 1 ms windows with a conjugate-product oracle.
        let rate = 40e6;
        let n = (0.1 * rate) as usize;
        let rx = ComplexBuffer::new(rate, vec![C64::new(0.0, 0.0); n]);
        let intf = Interferer::Swept {
            freq_hz: 890e6,
            power_rel_db: 0.0,
            sweep_rate_hz_per_s: 200e6,
            phase_seed: 0,
        };
        let out = add_interferer(&rx, &intf, 900e6, 1.0).unwrap();
        let window = (1e-3 * rate) as usize;
        let mut freqs = Vec::new();
        for w in 0..(n / window) {
            let seg = &out.samples[w * window..(w + 1) * window];
            let mut acc = C64::new(0.0, 0.0);
            for k in 1..seg.len() {
                acc += seg[k] * seg[k - 1].conj();
            }
            freqs.push(acc.arg() * rate / (2.0 * PI));
        }
        // Linear fit of window-center frequency vs time.
        let m = freqs.len();
        let tbar = (m as f64 - 1.0) / 2.0;
        let fbar: f64 = freqs.iter().sum::<f64>() / m as f64;
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, &f) in freqs.iter().enumerate() {
            num += (i as f64 - tbar) * (f - fbar);
            den += (i as f64 - tbar) * (i as f64 - tbar);
        }
        let slope_per_window = num / den;
        let rate_hz_per_s = slope_per_window / 1e-3;
        assert!(
            (rate_hz_per_s / 200e6 - 1.0).abs() < 0.05,
            "measured sweep rate {rate_hz_per_s} Hz/s"
        );
    }

    #[test]
    fn out_of_band_interferer_rejected() {
        let rx = ComplexBuffer::new(40e6, vec![C64::new(0.0, 0.0); 16]);
        let intf = Interferer::Cw {
            freq_hz: 925e6, // +25 MHz offset, Nyquist is ±20 MHz
            power_rel_db: 0.0,
            phase_seed: 0,
        };
        assert!(add_interferer(&rx, &intf, 900e6, 1.0).is_err());
    }

    #[test]
    fn interferer_superposes_after_propagation() {
        // With frozen noise, adding the interferer after propagation
        // equals propagating and summing the standalone interferer
        // waveform: pure superposition.
        let cfg = ChannelConfig::default();
        let tx = two_tone_tx(512);
        let intf = Interferer::Cw {
            freq_hz: 905e6,
            power_rel_db: -3.0,
            phase_seed: 17,
        };
        let rx = propagate_one(&tx, &cfg, 2e6, &mut Rng::new(4));
        let with_intf = add_interferer(&rx, &intf, 900e6, 0.5).unwrap();
        let zeros = ComplexBuffer::new(40e6, vec![C64::new(0.0, 0.0); 512]);
        let standalone = add_interferer(&zeros, &intf, 900e6, 0.5).unwrap();
        for ((a, b), c) in with_intf.samples.iter().zip(&rx.samples).zip(&standalone.samples) {
            assert!((a - b - c).norm() < 1e-12);
        }
    }

    #[test]
    fn pulsed_interferer_respects_duty_cycle() {
        let rate = 1e6;
        let n = 1000;
        let rx = ComplexBuffer::new(rate, vec![C64::new(0.0, 0.0); n]);
        let intf = Interferer::PulsedCw {
            freq_hz: 900e6 + 1e5,
            power_rel_db: 0.0,
            duty_cycle: 0.25,
            period_s: 1e-4,
            phase_seed: 0,
        };
        let out = add_interferer(&rx, &intf, 900e6, 1.0).unwrap();
        let active = out.samples.iter().filter(|s| s.norm() > 1e-12).count() as i64;
        assert!(
            (active - 250).abs() <= 5,
            "expected ~25% duty over 1000 samples, got {active}"
        );
    }
}
