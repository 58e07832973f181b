//! Deterministic pseudorandom number generation.
//!
//! Every stochastic element of the simulator (hop pattern, channel noise,
//! LNA noise, interferer phases, Monte-Carlo trials) draws from a
//! [`Rng`] built on SplitMix64. The generator is fixed by contract so that
//! identical seeds yield bit-identical sample streams on every platform,
//! and so that reimplementations in other languages can match the streams
//! exactly.
//!
//! Independent sub-streams are derived as `SplitMix64(master_seed XOR
//! fnv1a64(label))`, where the label is a short stage/follower string such
//! as `"follower-2-noise"`. FNV-1a is spelled out in [`fnv1a64`] so the
//! derivation is reproducible outside this crate.

use std::f64::consts::PI;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 generator state.
///
/// A plain 64-bit state; copying the struct forks the stream. All
/// operations that consume randomness take `&mut Rng` so the draw order is
/// explicit in the call graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rng {
    state: u64,
}

impl Rng {
    /// Creates a generator seeded with `seed`.
    pub fn new(seed: u64) -> Self {
        Rng { state: seed }
    }

    /// Creates the sub-stream generator for `label`, seeded with
    /// `master_seed XOR fnv1a64(label)`.
    pub fn from_label(master_seed: u64, label: &str) -> Self {
        Rng::new(master_seed ^ fnv1a64(label.as_bytes()))
    }

    /// Standard SplitMix64 step: returns the next 64-bit output.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in `[0, 1)` using the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `(0, 1]`; safe as a `ln()` argument.
    fn next_f64_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// One pair of independent standard-normal draws (Box-Muller).
    ///
    /// Complex noise wants normals in pairs, so the transform's natural
    /// output shape is kept and nothing is cached between calls.
    pub fn next_gaussian_pair(&mut self) -> (f64, f64) {
        let u1 = self.next_f64_open();
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        (r * c, r * s)
    }

    /// Fills `out` with standard-normal draws, pairwise in order.
    ///
    /// An odd tail consumes a full pair and discards the second value, so
    /// `fill_gaussian` on one slice of length `2n` equals two fills of
    /// length `n` back to back.
    pub fn fill_gaussian(&mut self, out: &mut [f64]) {
        let mut chunks = out.chunks_exact_mut(2);
        for pair in &mut chunks {
            let (a, b) = self.next_gaussian_pair();
            pair[0] = a;
            pair[1] = b;
        }
        if let [last] = chunks.into_remainder() {
            *last = self.next_gaussian_pair().0;
        }
    }
}

/// 64-bit FNV-1a hash, used to turn sub-stream labels into seed offsets.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}
