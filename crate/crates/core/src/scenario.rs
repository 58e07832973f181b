//! Scenario configuration: schema, defaults, validation, and digests.
//!
//! Scenarios are JSON with strict unknown-key rejection — a silently
//! ignored typo in a filter parameter would invalidate a whole run. An
//! empty object `{}` yields the full default demonstration setup: five
//! centers 890–910 MHz, 10 MHz tone spacing, 1 s dwell, 3 m link, 20 dB
//! per-tone SNR, three followers.
//!
//! Every scenario canonicalizes to a JSON string with sorted keys and
//! shortest round-trip float formatting; its SHA-256 is the run digest
//! reported in artifacts.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{ChannelConfig, Interferer};
use crate::error::{Error, Result};
use crate::leader::{HopSchedule, TwoToneConfig};
use crate::osc::OscillatorModel;
use crate::receiver::ReceiverChainConfig;
use crate::rng::fnv1a64;

/// Analysis-stage parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    /// Nominal reference frequency for phase demodulation, Hz.
    pub f_nominal_hz: f64,
    /// Demodulation low-pass cutoff, Hz.
    pub lp_bw_hz: f64,
    pub lp_num_taps: usize,
    /// Decimation applied to the phase series.
    pub decim: usize,
    /// Hop gate width as a multiple of the reference filter group delay.
    pub gate_multiplier: f64,
    /// Transient inspection window after each hop, seconds.
    pub window_s: f64,
    /// Settle band around the median envelope (relative).
    pub settle_band: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            f_nominal_hz: 10e6,
            lp_bw_hz: 400e3,
            lp_num_taps: 201,
            decim: 40,
            gate_multiplier: 3.0,
            window_s: 1e-3,
            settle_band: 0.1,
        }
    }
}

/// Complete description of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub master_seed: u64,
    pub rate_hz: f64,
    /// RF frequency that complex baseband zero corresponds to. The same
    /// value is propagated into `two_tone.sim_center_hz` at load time.
    pub sim_center_hz: f64,
    pub duration_s: f64,
    pub leader_osc: OscillatorModel,
    pub two_tone: TwoToneConfig,
    pub hops: HopSchedule,
    pub channel: ChannelConfig,
    pub interferers: Vec<Interferer>,
    pub followers: Vec<ReceiverChainConfig>,
    pub analysis: AnalysisConfig,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            master_seed: 1,
            rate_hz: 40e6,
            sim_center_hz: 900e6,
            duration_s: 2.0,
            leader_osc: OscillatorModel::default(),
            two_tone: TwoToneConfig::default(),
            hops: HopSchedule::default(),
            channel: ChannelConfig::default(),
            interferers: Vec::new(),
            followers: vec![ReceiverChainConfig::default(); 3],
            analysis: AnalysisConfig::default(),
        }
    }
}

impl Scenario {
    /// Parses a scenario from JSON text, fills defaults, and validates.
    pub fn from_json(text: &str) -> Result<Scenario> {
        let mut scenario: Scenario =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        scenario.finalize()?;
        Ok(scenario)
    }

    /// Loads and validates a scenario file.
    pub fn load(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("scenario", format!("{}: {e}", path.display())))?;
        Scenario::from_json(&text)
    }

    /// Fills derived fields and checks every cross-field constraint.
    pub fn finalize(&mut self) -> Result<()> {
        self.two_tone.sim_center_hz = self.sim_center_hz;
        if self.hops.total_duration_s.is_none() {
            self.hops.total_duration_s = Some(self.duration_s);
        }
        self.validate()
    }

    /// Seed for the hop-pattern stream: the explicit pattern seed, or a
    /// sub-stream of the master seed.
    pub fn hop_seed(&self) -> u64 {
        match &self.hops.pattern {
            crate::leader::HopPattern::Random { seed: Some(s) } => *s,
            _ => self.master_seed ^ fnv1a64(b"hops"),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rate_hz > 0.0) {
            return Err(Error::config("rate_hz", "must be positive"));
        }
        if !(self.duration_s > 0.0) {
            return Err(Error::config("duration_s", "must be positive"));
        }
        let nyquist = self.rate_hz / 2.0;

        if !(self.two_tone.delta_f_hz > 0.0) {
            return Err(Error::config("two_tone.delta_f_hz", "must be positive"));
        }
        if !(self.two_tone.tone_amplitude > 0.0) {
            return Err(Error::config("two_tone.tone_amplitude", "must be positive"));
        }

        if self.hops.centers_hz.is_empty() {
            return Err(Error::config("hops.centers_hz", "centers list is empty"));
        }
        if !(self.hops.dwell_s > 0.0) {
            return Err(Error::config("hops.dwell_s", "must be positive"));
        }
        let total = self.hops.total_duration_s.unwrap_or(self.duration_s);
        if total < self.hops.dwell_s {
            return Err(Error::config(
                "hops.total_duration_s",
                format!(
                    "total {total} s is shorter than one dwell {} s",
                    self.hops.dwell_s
                ),
            ));
        }
        for (k, &center) in self.hops.centers_hz.iter().enumerate() {
            let edge = (center - self.sim_center_hz).abs() + self.two_tone.delta_f_hz / 2.0;
            if edge >= nyquist {
                return Err(Error::config(
                    format!("hops.centers_hz[{k}]"),
                    format!(
                        "tone offset reaches {edge} Hz, at or beyond Nyquist {nyquist} Hz \
                         (hop offset + delta_f/2 must stay below rate/2)"
                    ),
                ));
            }
        }

        if !(self.channel.distance_m > 0.0) {
            return Err(Error::config("channel.distance_m", "must be positive"));
        }

        for (k, intf) in self.interferers.iter().enumerate() {
            let offset = intf.freq_hz() - self.sim_center_hz;
            if offset.abs() >= nyquist {
                return Err(Error::config(
                    format!("interferers[{k}].freq_hz"),
                    format!("baseband offset {offset} Hz outside Nyquist ±{nyquist} Hz"),
                ));
            }
            if let Interferer::Swept { sweep_rate_hz_per_s, .. } = *intf {
                let end = offset + sweep_rate_hz_per_s * self.duration_s;
                if end.abs() >= nyquist {
                    return Err(Error::config(
                        format!("interferers[{k}].sweep_rate_hz_per_s"),
                        format!("sweep ends at offset {end} Hz, outside Nyquist"),
                    ));
                }
            }
            if let Interferer::PulsedCw { duty_cycle, period_s, .. } = *intf {
                if !(0.0..=1.0).contains(&duty_cycle) || !(period_s > 0.0) {
                    return Err(Error::config(
                        format!("interferers[{k}].duty_cycle"),
                        "duty_cycle must be in [0,1] with positive period_s",
                    ));
                }
            }
        }

        if self.followers.is_empty() {
            return Err(Error::config("followers", "at least one follower required"));
        }
        for (i, f) in self.followers.iter().enumerate() {
            let p = |field: &str| format!("followers[{i}].{field}");
            if f.front_bpf.num_taps % 2 == 0 || f.front_bpf.num_taps < 11 {
                return Err(Error::config(
                    p("front_bpf.num_taps"),
                    "tap count must be odd and at least 11",
                ));
            }
            if f.ref_bpf.num_taps % 2 == 0 || f.ref_bpf.num_taps < 11 {
                return Err(Error::config(
                    p("ref_bpf.num_taps"),
                    "tap count must be odd and at least 11",
                ));
            }
            crate::receiver::design_front_filter(&f.front_bpf, self.rate_hz)
                .map_err(|e| Error::config(p("front_bpf.bw_hz"), e.to_string()))?;
            if f.ref_bpf.center_hz != self.two_tone.delta_f_hz {
                return Err(Error::config(
                    p("ref_bpf.center_hz"),
                    format!(
                        "reference filter center {} Hz must equal the tone spacing {} Hz",
                        f.ref_bpf.center_hz, self.two_tone.delta_f_hz
                    ),
                ));
            }
            let ref_hi = f.ref_bpf.center_hz + f.ref_bpf.bw_hz / 2.0;
            let ref_lo = f.ref_bpf.center_hz - f.ref_bpf.bw_hz / 2.0;
            if ref_lo <= 0.0 || ref_hi >= nyquist {
                return Err(Error::config(
                    p("ref_bpf.bw_hz"),
                    format!("band [{ref_lo}, {ref_hi}] Hz must lie inside (0, {nyquist})"),
                ));
            }
            if !(f.agc.target_rms > 0.0)
                || !(f.agc.loop_gain > 0.0)
                || !(f.agc.rms_time_constant_s > 0.0)
            {
                return Err(Error::config(
                    p("agc"),
                    "target_rms, loop_gain, rms_time_constant_s must be positive",
                ));
            }
        }

        let a = &self.analysis;
        if a.decim == 0 {
            return Err(Error::config("analysis.decim", "must be at least 1"));
        }
        if !(a.lp_bw_hz > 0.0) || a.lp_bw_hz >= self.rate_hz / (2.0 * a.decim as f64) {
            return Err(Error::config(
                "analysis.lp_bw_hz",
                format!(
                    "must lie in (0, {}) to avoid aliasing after decimation",
                    self.rate_hz / (2.0 * a.decim as f64)
                ),
            ));
        }
        if a.lp_num_taps % 2 == 0 || a.lp_num_taps < 11 {
            return Err(Error::config(
                "analysis.lp_num_taps",
                "tap count must be odd and at least 11",
            ));
        }
        for (i, f) in self.followers.iter().enumerate() {
            let lo = f.ref_bpf.center_hz - f.ref_bpf.bw_hz / 2.0;
            let hi = f.ref_bpf.center_hz + f.ref_bpf.bw_hz / 2.0;
            if a.f_nominal_hz < lo || a.f_nominal_hz > hi {
                return Err(Error::config(
                    "analysis.f_nominal_hz",
                    format!(
                        "{} Hz is outside follower {i}'s reference band [{lo}, {hi}] Hz",
                        a.f_nominal_hz
                    ),
                ));
            }
            let ref_gd = (f.ref_bpf.num_taps - 1) as f64 / (2.0 * self.rate_hz);
            if a.window_s < 5.0 * ref_gd {
                return Err(Error::config(
                    "analysis.window_s",
                    format!(
                        "{} s does not cover 5x the reference group delay ({} s)",
                        a.window_s,
                        5.0 * ref_gd
                    ),
                ));
            }
        }
        if !(a.gate_multiplier >= 0.0) || !(a.settle_band > 0.0) {
            return Err(Error::config(
                "analysis.gate_multiplier",
                "gate_multiplier must be >= 0 and settle_band positive",
            ));
        }
        Ok(())
    }

    /// Canonical JSON: sorted keys, shortest round-trip floats.
    pub fn canonical_json(&self) -> String {
        // serde_json's Map is ordered (BTreeMap) by default, so routing
        // through Value sorts keys.
        let value = serde_json::to_value(self).expect("scenario serializes");
        serde_json::to_string(&value).expect("canonical json")
    }

    /// SHA-256 of the canonical JSON, as lowercase hex.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.canonical_json().as_bytes());
        let out = hasher.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Enumerates the scalar leaf paths of a scenario (dot-separated, array
/// indices inline), used by sweep to explain bad parameter paths.
pub fn leaf_paths(scenario: &Scenario) -> Vec<String> {
    let value = serde_json::to_value(scenario).expect("scenario serializes");
    let mut out = Vec::new();
    walk(&value, String::new(), &mut out);
    out
}

fn walk(v: &serde_json::Value, prefix: String, out: &mut Vec<String>) {
    match v {
        serde_json::Value::Object(map) => {
            for (k, child) in map {
                let p = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                walk(child, p, out);
            }
        }
        serde_json::Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                walk(child, format!("{prefix}.{i}"), out);
            }
        }
        _ => out.push(prefix),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::leader::HopPattern;

    #[test]
    fn empty_object_yields_default_demo_scenario() {
        let s = Scenario::from_json("{}").unwrap();
        assert_eq!(s.rate_hz, 40e6);
        assert_eq!(s.sim_center_hz, 900e6);
        assert_eq!(s.two_tone.delta_f_hz, 10e6);
        assert_eq!(
            s.hops.centers_hz,
            vec![890e6, 895e6, 900e6, 905e6, 910e6]
        );
        assert_eq!(s.hops.dwell_s, 1.0);
        assert_eq!(s.channel.distance_m, 3.0);
        assert_eq!(s.followers.len(), 3);
        assert_eq!(s.two_tone.sim_center_hz, 900e6);
        assert_eq!(s.hops.total_duration_s, Some(2.0));
    }

    #[test]
    fn zero_dwell_names_field_path() {
        let err = Scenario::from_json(r#"{"hops": {"dwell_s": 0.0}}"#).unwrap_err();
        assert!(
            err.to_string().contains("hops.dwell_s"),
            "error must name hops.dwell_s, got: {err}"
        );
    }

    #[test]
    fn wide_tone_spacing_violates_nyquist() {
        let err =
            Scenario::from_json(r#"{"two_tone": {"delta_f_hz": 3e7}}"#).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("Nyquist"), "got: {msg}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = Scenario::from_json(r#"{"rate_mhz": 40}"#).unwrap_err();
        assert!(err.to_string().contains("rate_mhz"), "got: {err}");
        let err = Scenario::from_json(r#"{"hops": {"dwel_s": 0.5}}"#).unwrap_err();
        assert!(err.to_string().contains("dwel_s"), "got: {err}");
    }

    #[test]
    fn ref_filter_center_must_match_spacing() {
        let err = Scenario::from_json(
            r#"{"followers": [{"ref_bpf": {"center_hz": 9e6}}]}"#,
        )
        .unwrap_err();
        assert!(
            err.to_string().contains("ref_bpf.center_hz"),
            "got: {err}"
        );
    }

    #[test]
    fn scenario_roundtrips_unchanged() {
        let mut s = Scenario::default();
        s.finalize().unwrap();
        let json = serde_json::to_string(&s).unwrap();
        let reloaded = Scenario::from_json(&json).unwrap();
        assert_eq!(s, reloaded);

        // Every optional branch exercised.
        let custom = r#"{
            "master_seed": 42,
            "duration_s": 0.25,
            "leader_osc": {"ppm_offset": 1.0, "drift_ppm_per_s": 0.01,
                           "phase_noise_diffusion": 1e-6, "initial_phase_rad": 0.5},
            "two_tone": {"tone_amplitude": 2.0, "pa_gain_db": 10.0,
                          "pa_saturation": {"output_ceiling": 4.0},
                          "hop_phase": "randomized"},
            "hops": {"dwell_s": 0.05, "pattern": {"fixed_sequence": [0, 2, 4]}},
            "channel": {"noise": {"mode": "density", "dbm_per_hz": -120.0}},
            "interferers": [
                {"kind": "cw", "freq_hz": 905e6, "power_rel_db": -3.0},
                {"kind": "swept", "freq_hz": 895e6, "power_rel_db": 0.0,
                 "sweep_rate_hz_per_s": 1e6, "phase_seed": 9},
                {"kind": "pulsed_cw", "freq_hz": 900e6, "power_rel_db": -10.0,
                 "duty_cycle": 0.5, "period_s": 0.01}
            ],
            "followers": [{"follower_ppm": 5.0, "lna_first": true}]
        }"#;
        let s1 = Scenario::from_json(custom).unwrap();
        let json1 = serde_json::to_string(&s1).unwrap();
        let s2 = Scenario::from_json(&json1).unwrap();
        assert_eq!(s1, s2);
    }

    #[test]
    fn digest_is_stable_and_seed_sensitive() {
        let mut a = Scenario::default();
        a.finalize().unwrap();
        let mut b = Scenario::default();
        b.finalize().unwrap();
        assert_eq!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 64);
        b.master_seed = 2;
        assert_ne!(a.digest(), b.digest());
    }

    #[test]
    fn hop_seed_prefers_explicit_pattern_seed() {
        let mut s = Scenario::default();
        s.hops.pattern = HopPattern::Random { seed: Some(123) };
        assert_eq!(s.hop_seed(), 123);
        s.hops.pattern = HopPattern::Random { seed: None };
        let derived = s.hop_seed();
        assert_eq!(derived, s.master_seed ^ fnv1a64(b"hops"));
    }

    #[test]
    fn leaf_paths_include_nested_fields() {
        let mut s = Scenario::default();
        s.finalize().unwrap();
        let paths = leaf_paths(&s);
        assert!(paths.iter().any(|p| p == "hops.dwell_s"));
        assert!(paths.iter().any(|p| p == "channel.noise.snr_db"));
        assert!(paths.iter().any(|p| p == "followers.0.agc.target_rms"));
    }
}
