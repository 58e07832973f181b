//! Command-line front end: run scenarios, sweep parameters, re-analyze
//! recorded clocks.
//!
//! Exit codes: 0 success, 2 configuration/validation error, 3 analysis
//! error, 1 anything else. `TWOTONE_THREADS` caps worker parallelism;
//! results are identical for any worker count.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hoptone_core::error::Error;
use hoptone_core::run::{analyze_recording, run, sweep};
use hoptone_core::scenario::{AnalysisConfig, Scenario};

#[derive(Parser)]
#[command(name = "hoptone", version, about = "Frequency-hopped two-tone clock-sync simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write metrics and per-follower artifacts.
    Run {
        /// Scenario JSON file ("{}" gives the default demo setup).
        #[arg(long)]
        scenario: PathBuf,
        /// Output directory for metrics.json, clock_<id>.csv, spectrum_<id>.csv.
        #[arg(long)]
        out: PathBuf,
        /// Override the scenario's master seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the scenario once per value of a swept scalar parameter.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        /// Dotted path of the field to sweep, e.g. hops.dwell_s.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Re-analyze an externally recorded clock (binary f32-LE I/Q).
    Analyze {
        /// I/Q file (interleaved 32-bit little-endian floats).
        #[arg(long)]
        input: PathBuf,
        /// Sidecar header JSON; defaults to <input>.json.
        #[arg(long)]
        header: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Demodulation reference frequency in Hz.
        #[arg(long, default_value_t = 10e6)]
        f_nominal: f64,
    },
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("TWOTONE_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config { .. } | Error::Parse(_) => ExitCode::from(2),
                Error::Analysis(_) => ExitCode::from(3),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { scenario, out, seed } => {
            let mut s = Scenario::load(&scenario)?;
            if let Some(seed) = seed {
                s.master_seed = seed;
            }
            let report = run(&s, Some(&out))?;
            println!("digest    {}", report.scenario_digest);
            for m in &report.metrics {
                println!(
                    "f_hat     {:.3} Hz  (phi0 {:.4} rad, residual {:.4} rad, gated {:.1}%)",
                    m.f_hat_hz,
                    m.phi0_hat_rad,
                    m.residual_rms_rad,
                    m.gated_fraction * 100.0
                );
            }
            println!("pairwise  max |Δf| = {:.3} Hz", report.max_pairwise_hz());
            println!("wall time {:.2} s", report.wall_time_s);
            println!("artifacts in {}", out.display());
            Ok(())
        }
        Command::Sweep {
            scenario,
            param,
            values,
            out,
            seed,
        } => {
            let mut s = Scenario::load(&scenario)?;
            if let Some(seed) = seed {
                s.master_seed = seed;
            }
            let reports = sweep(&s, &param, &values, Some(&out))?;
            for (v, r) in values.iter().zip(&reports) {
                let worst = r.disturbed_fraction.iter().cloned().fold(0.0_f64, f64::max);
                println!(
                    "{param} = {v}: f_hat_0 = {:.3} Hz, disturbed = {:.4}, max |Δf| = {:.3} Hz",
                    r.metrics[0].f_hat_hz,
                    worst,
                    r.max_pairwise_hz()
                );
            }
            println!("sweep results in {}", out.join("sweep.csv").display());
            Ok(())
        }
        Command::Analyze {
            input,
            header,
            out,
            f_nominal,
        } => {
            let cfg = AnalysisConfig {
                f_nominal_hz: f_nominal,
                ..Default::default()
            };
            let metrics = analyze_recording(&input, header.as_deref(), &cfg, Some(&out))?;
            println!(
                "f_hat {:.3} Hz (phi0 {:.4} rad, residual {:.4} rad)",
                metrics.f_hat_hz, metrics.phi0_hat_rad, metrics.residual_rms_rad
            );
            Ok(())
        }
    }
}
