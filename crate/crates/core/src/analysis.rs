//! Clock characterization: quadrature phase extraction, unwrapping,
//! linear-regression frequency estimation, pairwise comparison, and
//! hop-transient envelope metrics.
//!
//! The extracted clock phase is modeled as `φ(t) = 2πft + φ₀ + ω(t)`.
//! Demodulation multiplies the real clock by `e^{-j2πf_nom t}`, low-passes
//! and decimates, and takes the unwrapped argument, leaving a residual
//! slope proportional to `f - f_nom`. An ordinary least-squares line over
//! the ungated samples yields `f̂` and `φ̂₀`; sub-Hz resolution over
//! sub-second captures is exactly what the regression buys over a DFT
//! peak.
//!
//! Times in a [`PhaseSeries`] are in the follower's local timebase,
//! `t_local = t_global · (1 + ε_F·1e-6)`: the follower counts cycles
//! against its own imperfect clock, so its timebase error shows up as a
//! measurement scale, not as a signal-path effect.

use std::f64::consts::PI;

use serde::Serialize;

use crate::buffer::C64;
use crate::error::{Error, Result};
use crate::fir;
use crate::receiver::ExtractedClock;

/// Decimated phase/envelope track of one extracted clock.
#[derive(Debug, Clone)]
pub struct PhaseSeries {
    /// Sample times in the follower's local timebase, seconds.
    pub times_s: Vec<f64>,
    /// Unwrapped phase, radians.
    pub phase_rad: Vec<f64>,
    /// Envelope of the low-passed analytic product.
    pub envelope: Vec<f64>,
    /// Rate of the decimated track, Hz.
    pub decimated_rate_hz: f64,
    /// Nominal frequency removed during demodulation, Hz.
    pub f_nominal_hz: f64,
    /// Local-time scale `1 + ε_F·1e-6` used for `times_s`.
    pub timebase_scale: f64,
    /// Local time at which all filter transients have cleared.
    pub settled_time_s: f64,
}

/// One detected hop transient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransientEvent {
    /// Hop instant in local time, seconds.
    pub hop_time_s: f64,
    /// `1 - min(envelope in window) / median(envelope outside windows)`.
    pub dip_depth: f64,
    /// Time from the hop until the envelope re-enters the settle band and
    /// holds there, seconds.
    pub settling_time_s: f64,
    /// Set when the window was cut short (overlapping hops) or the
    /// envelope never settled inside it.
    pub saturated: bool,
}

/// Regression results for one extracted clock.
#[derive(Debug, Clone, Serialize)]
pub struct ClockMetrics {
    pub f_hat_hz: f64,
    pub phi0_hat_rad: f64,
    pub residual_rms_rad: f64,
    /// Fraction of phase samples excluded by the gates.
    pub gated_fraction: f64,
    #[serde(rename = "transients")]
    pub transient_events: Vec<TransientEvent>,
}

/// Wraps an angle to `(-π, π]`.
pub fn wrap_to_pi(x: f64) -> f64 {
    let y = x - 2.0 * PI * (x / (2.0 * PI)).round();
    if y <= -PI {
        y + 2.0 * PI
    } else {
        y
    }
}

/// Unwraps a wrapped phase sequence by adding multiples of 2π so no step
/// exceeds π in magnitude.
pub fn unwrap_phase(wrapped: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(wrapped.len());
    let mut offset = 0.0;
    let mut prev = match wrapped.first() {
        Some(&p) => p,
        None => return out,
    };
    out.push(prev);
    for &w in &wrapped[1..] {
        let d = w - prev;
        if d > PI {
            offset -= 2.0 * PI;
        } else if d <= -PI {
            offset += 2.0 * PI;
        }
        out.push(w + offset);
        prev = w;
    }
    out
}

/// Demodulates the extracted clock into a decimated phase series.
///
/// The clock is mixed with `e^{-j2πf_nom t}`, low-passed with a Hamming
/// windowed-sinc of cutoff `lp_bw_hz` and `lp_num_taps` taps, decimated by
/// `decim`, and converted to unwrapped phase and envelope. The mix and
/// filter are fused: only every `decim`-th output is computed.
pub fn demodulate_phase(
    clk: &ExtractedClock,
    f_nominal_hz: f64,
    lp_bw_hz: f64,
    lp_num_taps: usize,
    decim: usize,
) -> Result<PhaseSeries> {
    let rate = clk.signal.rate_hz;
    if decim == 0 {
        return Err(Error::config("analysis.decim", "decimation must be >= 1"));
    }
    if !(f_nominal_hz > 0.0) || f_nominal_hz >= rate / 2.0 {
        return Err(Error::config(
            "analysis.f_nominal_hz",
            format!("nominal frequency {f_nominal_hz} Hz outside (0, Nyquist)"),
        ));
    }
    if lp_bw_hz >= rate / (2.0 * decim as f64) {
        return Err(Error::config(
            "analysis.lp_bw_hz",
            format!(
                "low-pass bandwidth {lp_bw_hz} Hz aliases at decimated rate {}",
                rate / decim as f64
            ),
        ));
    }
    let lp = fir::design_lowpass(lp_bw_hz, lp_num_taps, rate)?;

    // Fused mix + filter: with c = 2πf_nom/rate,
    //   out[m] = Σ_j taps[j]·x[m-j]·e^{-jc(m-j)}
    //          = e^{-jcm} · Σ_j (taps[j]·e^{jcj}) · x[m-j]
    // so the modulated taps are precomputed and only decimated outputs m
    // are evaluated.
    let c = 2.0 * PI * f_nominal_hz / rate;
    let taps_mod: Vec<C64> = lp
        .taps
        .iter()
        .enumerate()
        .map(|(j, &t)| C64::from_polar(t, c * j as f64))
        .collect();

    let x = &clk.signal.samples;
    let n_out = x.len() / decim;
    let scale = 1.0 + clk.follower_ppm * 1e-6;
    let mut times = Vec::with_capacity(n_out);
    let mut wrapped = Vec::with_capacity(n_out);
    let mut envelope = Vec::with_capacity(n_out);
    for k in 0..n_out {
        let m = k * decim;
        let j_max = taps_mod.len().min(m + 1);
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..j_max {
            acc += taps_mod[j] * x[m - j];
        }
        let rotation = C64::from_polar(1.0, -c * m as f64);
        let v = acc * rotation;
        times.push((clk.signal.start_time_s + m as f64 / rate) * scale);
        wrapped.push(v.arg());
        envelope.push(v.norm());
    }
    let phase = unwrap_phase(&wrapped);

    let settle_samples = clk.signal.settle_prefix + (lp_num_taps - 1);
    let settled_time_s =
        (clk.signal.start_time_s + settle_samples as f64 / rate) * scale;

    Ok(PhaseSeries {
        times_s: times,
        phase_rad: phase,
        envelope,
        decimated_rate_hz: rate / decim as f64,
        f_nominal_hz,
        timebase_scale: scale,
        settled_time_s,
    })
}

/// Builds the standard gate list: the filter settling prefix plus a
/// window of `gate_width_s` after each hop instant. Hop instants are
/// given in global time and converted to the series' local timebase.
pub fn standard_gates(
    ps: &PhaseSeries,
    hop_instants_global_s: &[f64],
    gate_width_s: f64,
) -> Vec<(f64, f64)> {
    let mut gates = Vec::with_capacity(hop_instants_global_s.len() + 1);
    if let Some(&t0) = ps.times_s.first() {
        gates.push((t0, ps.settled_time_s));
    }
    for &h in hop_instants_global_s {
        let h_local = h * ps.timebase_scale;
        gates.push((h_local, h_local + gate_width_s * ps.timebase_scale));
    }
    gates
}

fn in_any_gate(t: f64, gates: &[(f64, f64)]) -> bool {
    gates.iter().any(|&(a, b)| t >= a && t < b)
}

/// Ordinary least-squares fit of phase vs local time over ungated samples.
///
/// The follower counts cycles against its own clock, so the demodulation
/// reference `f_nom` is itself a local-clock quantity:
/// `f̂ = f_nom/timebase_scale + slope/2π` with the slope taken against
/// local time. `φ̂₀ = intercept mod 2π` (phase extrapolated to local time
/// zero). Transient events are left empty; callers merge them from
/// [`transient_metrics`].
pub fn fit_frequency(ps: &PhaseSeries, gates: &[(f64, f64)]) -> Result<ClockMetrics> {
    let n_total = ps.times_s.len();
    let mut tsum = 0.0;
    let mut psum = 0.0;
    let mut n_used = 0usize;
    for (&t, &p) in ps.times_s.iter().zip(&ps.phase_rad) {
        if !in_any_gate(t, gates) {
            tsum += t;
            psum += p;
            n_used += 1;
        }
    }
    if n_used < 100 {
        // Name the gate that removed the most samples.
        let mut worst = (0usize, (0.0, 0.0));
        for &g in gates {
            let removed = ps.times_s.iter().filter(|&&t| t >= g.0 && t < g.1).count();
            if removed > worst.0 {
                worst = (removed, g);
            }
        }
        return Err(Error::analysis(format!(
            "only {n_used} of {n_total} samples left ungated (need >= 100); \
             widest gate ({:.6} s .. {:.6} s) removed {} samples",
            worst.1 .0, worst.1 .1, worst.0
        )));
    }
    let tbar = tsum / n_used as f64;
    let pbar = psum / n_used as f64;
    let mut stt = 0.0;
    let mut stp = 0.0;
    for (&t, &p) in ps.times_s.iter().zip(&ps.phase_rad) {
        if !in_any_gate(t, gates) {
            let dt = t - tbar;
            stt += dt * dt;
            stp += dt * (p - pbar);
        }
    }
    if stt == 0.0 {
        return Err(Error::analysis("degenerate time axis in regression"));
    }
    let slope = stp / stt;
    let intercept = pbar - slope * tbar;
    let mut rss = 0.0;
    for (&t, &p) in ps.times_s.iter().zip(&ps.phase_rad) {
        if !in_any_gate(t, gates) {
            let r = p - (intercept + slope * t);
            rss += r * r;
        }
    }
    Ok(ClockMetrics {
        f_hat_hz: ps.f_nominal_hz / ps.timebase_scale + slope / (2.0 * PI),
        phi0_hat_rad: intercept.rem_euclid(2.0 * PI),
        residual_rms_rad: (rss / n_used as f64).sqrt(),
        gated_fraction: 1.0 - n_used as f64 / n_total as f64,
        transient_events: Vec::new(),
    })
}

/// Antisymmetric matrix of pairwise frequency differences,
/// `D[i][j] = f̂_i - f̂_j`.
pub fn pairwise_differences(metrics: &[ClockMetrics]) -> Result<Vec<Vec<f64>>> {
    if metrics.len() < 2 {
        return Err(Error::analysis(format!(
            "pairwise comparison needs at least 2 followers, got {}",
            metrics.len()
        )));
    }
    Ok(metrics
        .iter()
        .map(|a| metrics.iter().map(|b| a.f_hat_hz - b.f_hat_hz).collect())
        .collect())
}

/// Largest |f̂_i - f̂_j| in a pairwise matrix.
pub fn max_pairwise_abs(matrix: &[Vec<f64>]) -> f64 {
    matrix
        .iter()
        .flatten()
        .fold(0.0_f64, |acc, &d| acc.max(d.abs()))
}

/// Envelope transient metrics around each hop instant.
///
/// For each hop, `dip_depth = 1 - min(envelope in window)/median` where
/// the median is taken over envelope samples outside every hop window
/// (and past the settling prefix). `settling_time_s` is the first time
/// after the hop at which the envelope re-enters `±settle_band` of the
/// median and stays there for at least `hold_s`. Windows truncated by the
/// next hop (dwell shorter than the window) produce saturated events.
pub fn transient_metrics(
    ps: &PhaseSeries,
    hop_instants_global_s: &[f64],
    window_s: f64,
    settle_band: f64,
    hold_s: f64,
) -> Vec<TransientEvent> {
    if hop_instants_global_s.is_empty() || ps.envelope.is_empty() {
        return Vec::new();
    }
    let hops_local: Vec<f64> = hop_instants_global_s
        .iter()
        .map(|&h| h * ps.timebase_scale)
        .collect();
    let window_local = window_s * ps.timebase_scale;

    // Median envelope over quiet samples.
    let mut quiet: Vec<f64> = ps
        .times_s
        .iter()
        .zip(&ps.envelope)
        .filter(|(&t, _)| {
            t >= ps.settled_time_s
                && !hops_local
                    .iter()
                    .any(|&h| t >= h && t < h + window_local)
        })
        .map(|(_, &e)| e)
        .collect();
    if quiet.is_empty() {
        return Vec::new();
    }
    let mid = quiet.len() / 2;
    quiet.select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).unwrap());
    let median = quiet[mid];
    if median <= 0.0 {
        return Vec::new();
    }

    let dt = 1.0 / ps.decimated_rate_hz;
    let hold_pts = ((hold_s * ps.timebase_scale) / dt).ceil().max(1.0) as usize;
    let t0 = ps.times_s[0];
    let idx_of = |t: f64| -> usize { (((t - t0) / ps.timebase_scale) / dt).ceil() as usize };

    let mut events = Vec::with_capacity(hops_local.len());
    for (k, &h) in hops_local.iter().enumerate() {
        let next_hop = hops_local.get(k + 1).copied().unwrap_or(f64::INFINITY);
        let full_end = h + window_local;
        let search_end = full_end.min(next_hop);
        let truncated = next_hop < full_end;
        let i_start = idx_of(h).min(ps.envelope.len());
        let i_end = idx_of(search_end).min(ps.envelope.len());
        if i_start >= i_end {
            continue;
        }
        let window = &ps.envelope[i_start..i_end];
        let min_env = window.iter().cloned().fold(f64::INFINITY, f64::min);
        let dip_depth = (1.0 - min_env / median).clamp(0.0, 1.0);

        let within = |e: f64| (e - median).abs() <= settle_band * median;
        let mut settling = None;
        'search: for i in 0..window.len() {
            let hold_end = (i + hold_pts).min(window.len());
            if hold_end - i < hold_pts && truncated {
                break; // not enough room to verify the hold
            }
            for j in i..hold_end {
                if !within(window[j]) {
                    continue 'search;
                }
            }
            settling = Some(ps.times_s[i_start + i] - h);
            break;
        }
        let (settling_time_s, saturated) = match settling {
            Some(s) => (s.max(0.0), false),
            None => (search_end - h, true),
        };
        events.push(TransientEvent {
            hop_time_s: h,
            dip_depth,
            settling_time_s,
            saturated: saturated || truncated,
        });
    }
    events
}

/// Fraction of the capture disturbed by hop transients:
/// `Σ min(settling, dwell) / total`, clamped to [0, 1].
pub fn disturbed_fraction(events: &[TransientEvent], dwell_s: f64, total_s: f64) -> f64 {
    assert!(total_s > 0.0, "total duration must be positive");
    let sum: f64 = events
        .iter()
        .map(|e| e.settling_time_s.min(dwell_s))
        .sum();
    (sum / total_s).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::buffer::RealBuffer;
    use crate::rng::Rng;

    fn clock_from(signal: RealBuffer, ppm: f64) -> ExtractedClock {
        ExtractedClock {
            signal,
            hop_instants_s: vec![],
            follower_id: 0,
            follower_ppm: ppm,
            agc_clamped: false,
        }
    }

    fn cosine_clock(freq: f64, rate: f64, n: usize, ppm: f64) -> ExtractedClock {
        let samples = (0..n)
            .map(|i| (2.0 * PI * freq * i as f64 / rate).cos())
            .collect();
        clock_from(RealBuffer::new(rate, samples), ppm)
    }

    fn synthetic_series(times: Vec<f64>, phase: Vec<f64>, f_nom: f64) -> PhaseSeries {
        let rate = if times.len() > 1 {
            1.0 / (times[1] - times[0])
        } else {
            1.0
        };
        let n = times.len();
        PhaseSeries {
            times_s: times,
            phase_rad: phase,
            envelope: vec![1.0; n],
            decimated_rate_hz: rate,
            f_nominal_hz: f_nom,
            timebase_scale: 1.0,
            settled_time_s: 0.0,
        }
    }

    #[test]
    fn demod_on_nominal_gives_flat_phase() {
        let clk = cosine_clock(10e6, 40e6, 400_000, 0.0);
        let ps = demodulate_phase(&clk, 10e6, 400e3, 201, 40).unwrap();
        let m = fit_frequency(&ps, &standard_gates(&ps, &[], 0.0)).unwrap();
        assert!(
            (m.f_hat_hz - 10e6).abs() < 1e-4,
            "flat-phase fit f_hat {}",
            m.f_hat_hz
        );
    }

    #[test]
    fn demod_resolves_100_hz_offset() {
        let clk = cosine_clock(10e6 + 100.0, 40e6, 400_000, 0.0);
        let ps = demodulate_phase(&clk, 10e6, 400e3, 201, 40).unwrap();
        let m = fit_frequency(&ps, &standard_gates(&ps, &[], 0.0)).unwrap();
        assert!(
            (m.f_hat_hz - (10e6 + 100.0)).abs() < 0.01,
            "fit {} vs 10 MHz + 100 Hz",
            m.f_hat_hz
        );
    }

    #[test]
    fn follower_ppm_scales_measured_frequency() {
        // +10 ppm local clock: a true 10 MHz reads 10 MHz / (1 + 1e-5),
        // i.e. about 9,999,900 Hz.
        let clk = cosine_clock(10e6, 40e6, 400_000, 10.0);
        let ps = demodulate_phase(&clk, 10e6, 400e3, 201, 40).unwrap();
        let m = fit_frequency(&ps, &standard_gates(&ps, &[], 0.0)).unwrap();
        let expected = 10e6 / (1.0 + 1e-5);
        assert!(
            (m.f_hat_hz - expected).abs() < 0.01,
            "fit {} vs {expected}",
            m.f_hat_hz
        );
    }

    #[test]
    fn ols_exact_on_noiseless_ramp() {
        let n = 10_000;
        let times: Vec<f64> = (0..n).map(|k| k as f64 * 1e-6).collect();
        let phase: Vec<f64> = times.iter().map(|&t| 2.0 * PI * 250.0 * t + 0.3).collect();
        let ps = synthetic_series(times, phase, 10e6);
        let m = fit_frequency(&ps, &[]).unwrap();
        assert!(
            ((m.f_hat_hz - 10e6) / 250.0 - 1.0).abs() < 1e-9,
            "slope error beyond 1e-9 relative: {}",
            m.f_hat_hz - 10e6
        );
        assert!((m.phi0_hat_rad - 0.3).abs() < 1e-9);
        assert!(m.residual_rms_rad < 1e-9);
    }

    #[test]
    fn ols_variance_matches_closed_form() {
        // White phase noise σ = 0.1 rad over T = 10 ms at 1 MS/s:
        // std(f̂) ≈ σ·sqrt(12/(N·T²))/2π, verified within 20% over 100
        // Monte-Carlo trials.
        let sigma = 0.1;
        let t_total = 0.01;
        let rate = 1e6;
        let n = (t_total * rate) as usize;
        let times: Vec<f64> = (0..n).map(|k| k as f64 / rate).collect();
        let mut rng = Rng::new(0xACC);
        let mut estimates = Vec::with_capacity(100);
        let mut noise = vec![0.0; n];
        for _ in 0..100 {
            rng.fill_gaussian(&mut noise);
            let phase: Vec<f64> = times
                .iter()
                .zip(&noise)
                .map(|(&t, &w)| 2.0 * PI * 40.0 * t + sigma * w)
                .collect();
            let ps = synthetic_series(times.clone(), phase, 10e6);
            let m = fit_frequency(&ps, &[]).unwrap();
            estimates.push(m.f_hat_hz - 10e6);
        }
        let mean: f64 = estimates.iter().sum::<f64>() / estimates.len() as f64;
        let var: f64 = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>()
            / (estimates.len() - 1) as f64;
        let measured_std = var.sqrt();
        let expected_std = sigma * (12.0 / (n as f64 * t_total * t_total)).sqrt() / (2.0 * PI);
        assert!(
            (measured_std / expected_std - 1.0).abs() < 0.2,
            "std {measured_std} vs closed form {expected_std}"
        );
    }

    #[test]
    fn too_few_ungated_samples_names_gate() {
        let n = 1000;
        let times: Vec<f64> = (0..n).map(|k| k as f64 * 1e-6).collect();
        let phase = vec![0.0; n];
        let ps = synthetic_series(times, phase, 10e6);
        let err = fit_frequency(&ps, &[(0.0, 1.0)]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("removed 1000 samples"), "got: {msg}");
    }

    #[test]
    fn unwrap_rewrap_roundtrip() {
        let mut rng = Rng::new(31);
        let mut phase = 0.0;
        let mut wrapped = Vec::new();
        for _ in 0..5000 {
            phase += (rng.next_f64() - 0.3) * 2.0; // steps in (-0.6, 1.4) rad
            wrapped.push(wrap_to_pi(phase));
        }
        let unwrapped = unwrap_phase(&wrapped);
        for (k, (&u, &w)) in unwrapped.iter().zip(&wrapped).enumerate() {
            assert!(
                (wrap_to_pi(u) - w).abs() < 1e-9,
                "rewrap mismatch at {k}: {} vs {w}",
                wrap_to_pi(u)
            );
        }
        for pair in unwrapped.windows(2) {
            assert!((pair[1] - pair[0]).abs() <= PI + 1e-12);
        }
    }

    #[test]
    fn timebase_symmetry_first_order() {
        // f̂(+ε)·f̂(-ε) == f̂(0)² to within ε² relative (1e-12 at 1 ppm).
        let fit_with_ppm = |ppm: f64| {
            let clk = cosine_clock(10e6 + 50.0, 40e6, 200_000, ppm);
            let ps = demodulate_phase(&clk, 10e6, 400e3, 201, 40).unwrap();
            fit_frequency(&ps, &standard_gates(&ps, &[], 0.0))
                .unwrap()
                .f_hat_hz
        };
        let f_plus = fit_with_ppm(1.0);
        let f_minus = fit_with_ppm(-1.0);
        let f_zero = fit_with_ppm(0.0);
        let rel = (f_plus * f_minus / (f_zero * f_zero) - 1.0).abs();
        assert!(rel < 1e-10, "symmetry violated: {rel}");
    }

    #[test]
    fn pairwise_matrix_antisymmetric() {
        let mk = |f: f64| ClockMetrics {
            f_hat_hz: f,
            phi0_hat_rad: 0.0,
            residual_rms_rad: 0.0,
            gated_fraction: 0.0,
            transient_events: vec![],
        };
        let metrics = vec![mk(10e6 + 0.3), mk(10e6 - 0.2)];
        let d = pairwise_differences(&metrics).unwrap();
        assert!((d[0][1] - 0.5).abs() < 1e-12);
        assert!((d[1][0] + 0.5).abs() < 1e-12);
        assert_eq!(d[0][0], 0.0);
        assert!((max_pairwise_abs(&d) - 0.5).abs() < 1e-12);

        let same = vec![mk(10e6), mk(10e6)];
        let d0 = pairwise_differences(&same).unwrap();
        assert!(d0.iter().flatten().all(|&x| x == 0.0));

        assert!(pairwise_differences(&metrics[..1]).is_err());
    }

    #[test]
    fn no_hops_gives_no_events() {
        let ps = synthetic_series(
            (0..1000).map(|k| k as f64 * 1e-6).collect(),
            vec![0.0; 1000],
            10e6,
        );
        assert!(transient_metrics(&ps, &[], 1e-4, 0.1, 1e-5).is_empty());
    }

    #[test]
    fn dip_detected_in_envelope() {
        let n = 10_000;
        let dt = 1e-6;
        let times: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
        let mut envelope = vec![1.0; n];
        // 40% dip lasting 20 µs starting at t = 5 ms
        for e in envelope.iter_mut().skip(5000).take(20) {
            *e = 0.6;
        }
        let ps = PhaseSeries {
            times_s: times,
            phase_rad: vec![0.0; n],
            envelope,
            decimated_rate_hz: 1e6,
            f_nominal_hz: 10e6,
            timebase_scale: 1.0,
            settled_time_s: 0.0,
        };
        let events = transient_metrics(&ps, &[5e-3], 1e-3, 0.1, 5e-6);
        assert_eq!(events.len(), 1);
        assert!((events[0].dip_depth - 0.4).abs() < 1e-6);
        assert!(!events[0].saturated);
        // settles right after the dip ends: 20 µs ± hold resolution
        assert!(events[0].settling_time_s >= 19e-6 && events[0].settling_time_s < 40e-6);
    }

    #[test]
    fn disturbed_fraction_arithmetic() {
        assert_eq!(disturbed_fraction(&[], 0.01, 1.0), 0.0);
        let ev = |s: f64| TransientEvent {
            hop_time_s: 0.0,
            dip_depth: 0.5,
            settling_time_s: s,
            saturated: false,
        };
        let events: Vec<TransientEvent> = (0..5).map(|_| ev(2e-3)).collect();
        let f = disturbed_fraction(&events, 20e-3, 0.1);
        assert!((f - 0.10).abs() < 1e-12);
    }
}
