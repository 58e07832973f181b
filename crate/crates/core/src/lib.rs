//! Discrete-time complex-baseband simulator and analysis toolkit for
//! frequency-hopped two-tone wireless clock synchronization.
//!
//! A leader transmits two tones spaced by the reference frequency while
//! hopping the pair's center; followers recover the reference by
//! square-law self-mixing, with no knowledge of the hop pattern. The crate
//! simulates the whole chain — waveform synthesis, a flat AWGN channel
//! with optional interferers, the follower filter/mixer/AGC chain — and
//! quantifies extracted-clock accuracy, pairwise follower agreement, and
//! hop-instant envelope transients.
//!
//! Everything is deterministic: a scenario plus a master seed reproduces
//! every sample bit for bit, independent of worker count.
//!
//! ```
//! use hoptone_core::scenario::Scenario;
//! use hoptone_core::run::run;
//!
//! let mut scenario = Scenario::from_json("{}").unwrap();
//! scenario.duration_s = 0.01;
//! scenario.hops.dwell_s = 0.005;
//! scenario.hops.total_duration_s = None;
//! scenario.followers.truncate(1);
//! let report = run(&scenario, None).unwrap();
//! assert!((report.metrics[0].f_hat_hz - 10.0e6).abs() < 10.0);
//! ```

pub mod analysis;
pub mod buffer;
pub mod channel;
pub mod error;
pub mod fileio;
pub mod fir;
pub mod leader;
pub mod osc;
pub mod receiver;
pub mod rng;
pub mod run;
pub mod scenario;
pub mod spectrum;

pub use buffer::{ComplexBuffer, RealBuffer, SampleBuffer, C64};
pub use error::{Error, Result};
