//! End-to-end orchestration: synthesize → channel → extract → analyze,
//! plus parameter sweeps and re-analysis of recorded clocks.
//!
//! All RNG sub-streams are derived from the master seed before any
//! parallel work is dispatched, and per-follower results are collected in
//! index order, so reports are bit-identical regardless of worker count.
//! Artifact files are written by the orchestrator thread only.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{
    self, disturbed_fraction, ClockMetrics, PhaseSeries,
};
use crate::buffer::ComplexBuffer;
use crate::channel;
use crate::error::{Error, Result};
use crate::fileio;
use crate::leader::{self, HopSegment};
use crate::receiver::{self, ExtractedClock};
use crate::rng::Rng;
use crate::scenario::{leaf_paths, AnalysisConfig, Scenario};
use crate::spectrum;

/// Results of one scenario run.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub scenario_digest: String,
    pub metrics: Vec<ClockMetrics>,
    /// Antisymmetric matrix `f̂_i - f̂_j`; `[[0.0]]` for a single follower.
    pub pairwise_hz: Vec<Vec<f64>>,
    /// Per-follower disturbed fraction over the capture.
    pub disturbed_fraction: Vec<f64>,
    pub wall_time_s: f64,
    pub artifacts: Vec<PathBuf>,
}

impl RunReport {
    /// Largest pairwise |Δf̂| in Hz.
    pub fn max_pairwise_hz(&self) -> f64 {
        analysis::max_pairwise_abs(&self.pairwise_hz)
    }
}

/// Deterministic JSON payload written to `metrics.json` (no wall time or
/// paths: reruns must be byte-identical).
#[derive(Serialize)]
struct MetricsFile<'a> {
    scenario_digest: &'a str,
    followers: &'a [ClockMetrics],
    pairwise_hz: &'a [Vec<f64>],
    disturbed_fraction: &'a [f64],
}

struct FollowerOutput {
    metrics: ClockMetrics,
    disturbed: f64,
    clock: Option<ExtractedClock>,
    phase: Option<PhaseSeries>,
}

/// Runs a validated scenario, optionally writing artifacts into `out_dir`.
pub fn run(scenario: &Scenario, out_dir: Option<&Path>) -> Result<RunReport> {
    let t_start = Instant::now();
    let mut scenario = scenario.clone();
    scenario.finalize()?;
    let digest = scenario.digest();

    // Hop sequence.
    let mut hop_rng = Rng::new(scenario.hop_seed());
    let segments = leader::generate_hop_sequence(&scenario.hops, &mut hop_rng)?;
    let duration = scenario.duration_s;
    let hop_instants: Vec<f64> = leader::hop_instants(&segments)
        .into_iter()
        .filter(|&t| t < duration)
        .collect();

    // Leader waveform.
    let mut leader_rng = Rng::from_label(scenario.master_seed, "leader-osc");
    let tx = leader::synthesize_two_tone(
        &scenario.two_tone,
        &segments,
        duration,
        &scenario.leader_osc,
        scenario.rate_hz,
        &mut leader_rng,
    )
    .map_err(|e| e.with_context("stage=leader"))?;
    let tx = leader::apply_pa(&tx, &scenario.two_tone);

    let chan_scale = channel::channel_amplitude_scale(&scenario.channel);
    let tx_mean_power = tx.mean_power();
    let rx_tone_amplitude = chan_scale * (tx_mean_power / 2.0).sqrt();
    let rx_tone_power = rx_tone_amplitude * rx_tone_amplitude;

    let keep_signals = out_dir.is_some();
    let outputs: Result<Vec<FollowerOutput>> = scenario
        .followers
        .par_iter()
        .enumerate()
        .map(|(i, fcfg)| {
            let ref_bw = fcfg.ref_bpf.bw_hz;
            let noise_total =
                channel::noise_power(&scenario.channel, rx_tone_power, scenario.rate_hz, ref_bw);
            let noise_density = noise_total / scenario.rate_hz;

            let mut noise_rng = Rng::from_label(scenario.master_seed, &format!("follower-{i}-noise"));
            let mut rx: ComplexBuffer =
                channel::propagate_one(&tx, &scenario.channel, ref_bw, &mut noise_rng);
            for (k, intf) in scenario.interferers.iter().enumerate() {
                rx = channel::add_interferer(&rx, intf, scenario.sim_center_hz, rx_tone_amplitude)
                    .map_err(|e| {
                        e.with_context(&format!("stage=interferer-{k} follower={i}"))
                    })?;
            }

            let mut lna_rng = Rng::from_label(scenario.master_seed, &format!("follower-{i}-lna"));
            let clock = receiver::extract_reference(
                rx,
                fcfg,
                &hop_instants,
                i,
                noise_density,
                &mut lna_rng,
            )?;

            let a = &scenario.analysis;
            let ps = analysis::demodulate_phase(
                &clock,
                a.f_nominal_hz,
                a.lp_bw_hz,
                a.lp_num_taps,
                a.decim,
            )
            .map_err(|e| e.with_context(&format!("stage=demod follower={i}")))?;

            let ref_gd = (fcfg.ref_bpf.num_taps - 1) as f64 / (2.0 * scenario.rate_hz);
            let gates = analysis::standard_gates(&ps, &hop_instants, a.gate_multiplier * ref_gd);
            let mut metrics = analysis::fit_frequency(&ps, &gates)
                .map_err(|e| e.with_context(&format!("stage=fit follower={i}")))?;
            metrics.transient_events =
                analysis::transient_metrics(&ps, &hop_instants, a.window_s, a.settle_band, ref_gd);
            let disturbed =
                disturbed_fraction(&metrics.transient_events, scenario.hops.dwell_s, duration);

            Ok(FollowerOutput {
                metrics,
                disturbed,
                clock: keep_signals.then_some(clock),
                phase: keep_signals.then(|| ps),
            })
        })
        .collect();
    let outputs = outputs?;
    drop(tx);

    let metrics: Vec<ClockMetrics> = outputs.iter().map(|o| o.metrics.clone()).collect();
    let disturbed: Vec<f64> = outputs.iter().map(|o| o.disturbed).collect();
    let pairwise = if metrics.len() >= 2 {
        analysis::pairwise_differences(&metrics)?
    } else {
        vec![vec![0.0]]
    };

    let mut artifacts = Vec::new();
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        let metrics_path = dir.join("metrics.json");
        write_metrics_json(&metrics_path, &digest, &metrics, &pairwise, &disturbed)?;
        artifacts.push(metrics_path);
        for out in &outputs {
            let (clock, ps) = match (&out.clock, &out.phase) {
                (Some(c), Some(p)) => (c, p),
                _ => continue,
            };
            let id = clock.follower_id;
            let clock_path = dir.join(format!("clock_{id}.csv"));
            fileio::write_clock_csv(&clock_path, &clock.signal)?;
            artifacts.push(clock_path);
            let (freqs, psd) = spectrum::welch_psd(&clock.signal.samples, clock.signal.rate_hz);
            let spec_path = dir.join(format!("spectrum_{id}.csv"));
            fileio::write_spectrum_csv(&spec_path, &freqs, &psd)?;
            artifacts.push(spec_path);
            let phase_path = dir.join(format!("phase_{id}.csv"));
            fileio::write_phase_csv(&phase_path, ps)?;
            artifacts.push(phase_path);
        }
    }

    Ok(RunReport {
        scenario_digest: digest,
        metrics,
        pairwise_hz: pairwise,
        disturbed_fraction: disturbed,
        wall_time_s: t_start.elapsed().as_secs_f64(),
        artifacts,
    })
}

fn write_metrics_json(
    path: &Path,
    digest: &str,
    metrics: &[ClockMetrics],
    pairwise: &[Vec<f64>],
    disturbed: &[f64],
) -> Result<()> {
    let payload = MetricsFile {
        scenario_digest: digest,
        followers: metrics,
        pairwise_hz: pairwise,
        disturbed_fraction: disturbed,
    };
    let json =
        serde_json::to_string_pretty(&payload).map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(path, json)?;
    Ok(())
}

/// Replaces the scalar at a dotted `path` (array indices inline, e.g.
/// `followers.0.follower_ppm`) with `value`.
fn set_path(root: &mut serde_json::Value, path: &str, value: f64) -> Result<()> {
    let mut cursor = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (depth, part) in parts.iter().enumerate() {
        let last = depth == parts.len() - 1;
        match cursor {
            serde_json::Value::Object(map) => {
                let entry = map.get_mut(*part).ok_or_else(|| {
                    Error::config(path, format!("no key '{part}' at this position"))
                })?;
                if last {
                    *entry = number(value)?;
                    return Ok(());
                }
                cursor = entry;
            }
            serde_json::Value::Array(items) => {
                let idx: usize = part.parse().map_err(|_| {
                    Error::config(path, format!("'{part}' is not an array index"))
                })?;
                let entry = items.get_mut(idx).ok_or_else(|| {
                    Error::config(path, format!("index {idx} out of bounds"))
                })?;
                if last {
                    *entry = number(value)?;
                    return Ok(());
                }
                cursor = entry;
            }
            _ => {
                return Err(Error::config(
                    path,
                    format!("'{part}' descends into a scalar"),
                ))
            }
        }
    }
    Err(Error::config(path, "empty path"))
}

fn number(v: f64) -> Result<serde_json::Value> {
    serde_json::Number::from_f64(v)
        .map(serde_json::Value::Number)
        .ok_or_else(|| Error::config("value", format!("{v} is not a finite JSON number")))
}

/// One run per value of the swept parameter, each with a derived master
/// seed (`master XOR index`). Writes `sweep.csv` into `out_dir` when given.
pub fn sweep(
    scenario: &Scenario,
    param_path: &str,
    values: &[f64],
    out_dir: Option<&Path>,
) -> Result<Vec<RunReport>> {
    if values.is_empty() {
        return Err(Error::config("values", "sweep needs at least one value"));
    }
    let mut base = scenario.clone();
    base.finalize()?;
    let base_value = serde_json::to_value(&base).map_err(|e| Error::Parse(e.to_string()))?;
    // Fail fast with the list of valid paths.
    {
        let mut probe = base_value.clone();
        if set_path(&mut probe, param_path, values[0]).is_err() {
            let mut paths = leaf_paths(&base);
            paths.sort();
            return Err(Error::config(
                param_path,
                format!("not a scalar scenario field; valid paths:\n  {}", paths.join("\n  ")),
            ));
        }
    }

    let mut reports = Vec::with_capacity(values.len());
    for (idx, &v) in values.iter().enumerate() {
        let mut point = base_value.clone();
        set_path(&mut point, param_path, v)?;
        let mut s: Scenario =
            serde_json::from_value(point).map_err(|e| Error::Parse(e.to_string()))?;
        s.master_seed = base.master_seed ^ idx as u64;
        s.finalize()
            .map_err(|e| e.with_context(&format!("sweep point {idx} ({param_path}={v})")))?;
        let point_dir = out_dir.map(|d| d.join(format!("point_{idx}")));
        let report = run(&s, point_dir.as_deref())?;
        reports.push(report);
    }

    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        let path = dir.join("sweep.csv");
        let mut text = String::new();
        let n_followers = reports[0].metrics.len();
        text.push_str("value");
        for i in 0..n_followers {
            text.push_str(&format!(",f_hat_{i}_hz"));
        }
        text.push_str(",disturbed_fraction,max_pairwise_hz\n");
        for (report, &v) in reports.iter().zip(values) {
            text.push_str(&format!("{v}"));
            for m in &report.metrics {
                text.push_str(&format!(",{}", m.f_hat_hz));
            }
            let worst = report
                .disturbed_fraction
                .iter()
                .cloned()
                .fold(0.0_f64, f64::max);
            text.push_str(&format!(",{worst},{}\n", report.max_pairwise_hz()));
        }
        std::fs::write(path, text)?;
    }
    Ok(reports)
}

/// Re-analyzes an externally recorded clock (binary I/Q + sidecar header).
///
/// The I lane is taken as the real clock signal; there is no hop metadata,
/// so only the demodulation filter settling is gated.
pub fn analyze_recording(
    iq_path: &Path,
    header_path: Option<&Path>,
    cfg: &AnalysisConfig,
    out_dir: Option<&Path>,
) -> Result<ClockMetrics> {
    let (buf, _header) = fileio::read_iq(iq_path, header_path)?;
    let mut signal = buf.with_samples(buf.samples.iter().map(|s| s.re).collect());
    signal.rate_hz = buf.rate_hz;
    let clock = ExtractedClock {
        signal,
        hop_instants_s: vec![],
        follower_id: 0,
        follower_ppm: 0.0,
        agc_clamped: false,
    };
    let ps = analysis::demodulate_phase(&clock, cfg.f_nominal_hz, cfg.lp_bw_hz, cfg.lp_num_taps, cfg.decim)?;
    let gates = analysis::standard_gates(&ps, &[], 0.0);
    let metrics = analysis::fit_frequency(&ps, &gates)?;
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        let json = serde_json::to_string_pretty(&metrics)
            .map_err(|e| Error::Parse(e.to_string()))?;
        std::fs::write(dir.join("metrics.json"), json)?;
        fileio::write_phase_csv(&dir.join("phase_0.csv"), &ps)?;
    }
    Ok(metrics)
}

/// Hop segments for a scenario, exposed for tests and tooling.
pub fn scenario_segments(scenario: &Scenario) -> Result<Vec<HopSegment>> {
    let mut s = scenario.clone();
    s.finalize()?;
    let mut rng = Rng::new(s.hop_seed());
    leader::generate_hop_sequence(&s.hops, &mut rng)
}

/// Convenience: the per-follower received-tone amplitude used for J/S
/// scaling, exposed for tests.
pub fn received_tone_amplitude(scenario: &Scenario, tx: &ComplexBuffer) -> f64 {
    channel::channel_amplitude_scale(&scenario.channel) * (tx.mean_power() / 2.0).sqrt()
}
