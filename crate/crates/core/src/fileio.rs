//! Waveform and metrics file formats.
//!
//! Binary waveforms are interleaved 32-bit little-endian float I/Q pairs
//! with a JSON sidecar header (`{rate_hz, sim_center_hz, start_time_s}`),
//! replayable into external SDR tools. Real signals (extracted clocks)
//! use the same container with the Q lane zeroed. CSV exports carry a
//! single header row; floats are written in Rust's shortest round-trip
//! form so reruns produce byte-identical files.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::buffer::{ComplexBuffer, RealBuffer, C64};
use crate::error::{Error, Result};

/// Sidecar header describing a binary I/Q file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IqHeader {
    pub rate_hz: f64,
    /// RF frequency baseband zero corresponds to; 0 for real signals.
    pub sim_center_hz: f64,
    pub start_time_s: f64,
}

/// Writes interleaved f32-LE I/Q plus the sidecar `<path>.json`.
pub fn write_iq(path: &Path, buf: &ComplexBuffer, sim_center_hz: f64) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for s in &buf.samples {
        w.write_all(&(s.re as f32).to_le_bytes())?;
        w.write_all(&(s.im as f32).to_le_bytes())?;
    }
    w.flush()?;
    write_header(path, buf.rate_hz, sim_center_hz, buf.start_time_s)
}

/// Writes a real signal in the same container (Q lane zero).
pub fn write_real_as_iq(path: &Path, buf: &RealBuffer) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for &s in &buf.samples {
        w.write_all(&(s as f32).to_le_bytes())?;
        w.write_all(&0.0f32.to_le_bytes())?;
    }
    w.flush()?;
    write_header(path, buf.rate_hz, 0.0, buf.start_time_s)
}

fn write_header(path: &Path, rate_hz: f64, sim_center_hz: f64, start_time_s: f64) -> Result<()> {
    let header = IqHeader {
        rate_hz,
        sim_center_hz,
        start_time_s,
    };
    let sidecar = sidecar_path(path);
    let json = serde_json::to_string_pretty(&header)
        .map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(sidecar, json)?;
    Ok(())
}

/// `foo.iq` → `foo.iq.json`.
pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".json");
    std::path::PathBuf::from(os)
}

/// Reads an I/Q file with its header (from `header_path` if given, else
/// the default sidecar).
pub fn read_iq(path: &Path, header_path: Option<&Path>) -> Result<(ComplexBuffer, IqHeader)> {
    let sidecar = header_path
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| sidecar_path(path));
    let header_text = std::fs::read_to_string(&sidecar).map_err(|e| {
        Error::config(
            "header",
            format!("cannot read sidecar {}: {e}", sidecar.display()),
        )
    })?;
    let header: IqHeader =
        serde_json::from_str(&header_text).map_err(|e| Error::Parse(e.to_string()))?;
    if !(header.rate_hz > 0.0) {
        return Err(Error::config("header.rate_hz", "rate must be positive"));
    }
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::config(
            "input",
            format!("file length {} is not a multiple of 8 bytes", bytes.len()),
        ));
    }
    let samples: Vec<C64> = bytes
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64;
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]) as f64;
            C64::new(re, im)
        })
        .collect();
    let mut buf = ComplexBuffer::new(header.rate_hz, samples);
    buf.start_time_s = header.start_time_s;
    Ok((buf, header))
}

/// Writes a clock CSV: `time_s,value`.
pub fn write_clock_csv(path: &Path, buf: &RealBuffer) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "time_s,value")?;
    for (n, &v) in buf.samples.iter().enumerate() {
        writeln!(w, "{},{}", buf.time_of(n), v)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a spectrum CSV: `freq_hz,psd`.
pub fn write_spectrum_csv(path: &Path, freqs: &[f64], psd: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "freq_hz,psd")?;
    for (f, p) in freqs.iter().zip(psd) {
        writeln!(w, "{f},{p}")?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a phase-series CSV: `time_s,phase_rad,envelope`.
pub fn write_phase_csv(path: &Path, ps: &crate::analysis::PhaseSeries) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "time_s,phase_rad,envelope")?;
    for ((t, p), e) in ps.times_s.iter().zip(&ps.phase_rad).zip(&ps.envelope) {
        writeln!(w, "{t},{p},{e}")?;
    }
    w.flush()?;
    Ok(())
}
