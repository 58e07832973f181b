//! Uniformly sampled signal buffers.
//!
//! [`SampleBuffer`] is the currency passed between every pipeline stage: a
//! sample vector plus the rate and global start time needed to interpret
//! it. Complex buffers hold a complex envelope relative to a scenario-level
//! center frequency (the buffer itself never carries the center); real
//! buffers are plain passband/video samples.
//!
//! Filtering marks each buffer with a settling prefix — the number of
//! leading samples still influenced by the filter's zero initial history.
//! The prefix accumulates through a chain of stages and analysis gates it
//! out.

use num_complex::Complex;

/// Complex sample type used throughout the simulator.
pub type C64 = Complex<f64>;

mod sealed {
    use super::C64;
    pub trait Sealed {}
    impl Sealed for f64 {}
    impl Sealed for C64 {}
}

/// Sample element: either `f64` (real buffer) or [`C64`] (complex
/// baseband). The trait is sealed; the two kinds are fixed by design.
pub trait Sample:
    sealed::Sealed
    + Copy
    + std::ops::Add<Output = Self>
    + std::ops::Mul<f64, Output = Self>
    + std::ops::AddAssign
    + PartialEq
    + std::fmt::Debug
    + Send
    + Sync
    + 'static
{
    const ZERO: Self;
    /// Magnitude squared of the sample.
    fn abs_sq(self) -> f64;
}

impl Sample for f64 {
    const ZERO: f64 = 0.0;
    fn abs_sq(self) -> f64 {
        self * self
    }
}

impl Sample for C64 {
    const ZERO: C64 = Complex::new(0.0, 0.0);
    fn abs_sq(self) -> f64 {
        self.norm_sqr()
    }
}

/// A uniformly sampled signal with explicit rate and start time.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBuffer<T: Sample> {
    /// Sample rate in samples per second. Always positive.
    pub rate_hz: f64,
    /// Global simulator time of `samples[0]`, in seconds.
    pub start_time_s: f64,
    /// Number of leading samples still inside filter transients.
    pub settle_prefix: usize,
    /// The samples themselves.
    pub samples: Vec<T>,
}

/// Complex-baseband buffer.
pub type ComplexBuffer = SampleBuffer<C64>;
/// Real-valued buffer.
pub type RealBuffer = SampleBuffer<f64>;

impl<T: Sample> SampleBuffer<T> {
    /// New buffer starting at t = 0 with no settling prefix.
    pub fn new(rate_hz: f64, samples: Vec<T>) -> Self {
        assert!(rate_hz > 0.0, "rate_hz must be positive");
        SampleBuffer {
            rate_hz,
            start_time_s: 0.0,
            settle_prefix: 0,
            samples,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Exact duration `len / rate` in seconds.
    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.rate_hz
    }

    /// Global time of sample `n`.
    pub fn time_of(&self, n: usize) -> f64 {
        self.start_time_s + n as f64 / self.rate_hz
    }

    /// Mean sample power `E[|x|^2]`.
    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        let sum: f64 = self.samples.iter().map(|s| s.abs_sq()).sum();
        sum / self.samples.len() as f64
    }

    /// RMS over samples past the settling prefix.
    pub fn settled_rms(&self) -> f64 {
        let tail = &self.samples[self.settle_prefix.min(self.samples.len())..];
        if tail.is_empty() {
            return 0.0;
        }
        let sum: f64 = tail.iter().map(|s| s.abs_sq()).sum();
        (sum / tail.len() as f64).sqrt()
    }

    /// Buffer of the same shape and timing with `samples` replaced.
    pub fn with_samples<U: Sample>(&self, samples: Vec<U>) -> SampleBuffer<U> {
        SampleBuffer {
            rate_hz: self.rate_hz,
            start_time_s: self.start_time_s,
            settle_prefix: self.settle_prefix,
            samples,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duration_is_exact() {
        let buf = RealBuffer::new(40e6, vec![0.0; 4_000_000]);
        assert_eq!(buf.duration_s(), 0.1);
    }

    #[test]
    fn mean_power_of_complex_tone() {
        let samples: Vec<C64> = (0..1000)
            .map(|n| C64::from_polar(2.0, 0.01 * n as f64))
            .collect();
        let buf = ComplexBuffer::new(1e6, samples);
        assert!((buf.mean_power() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn settled_rms_skips_prefix() {
        let mut buf = RealBuffer::new(1.0, vec![100.0, 100.0, 3.0, 3.0]);
        buf.settle_prefix = 2;
        assert!((buf.settled_rms() - 3.0).abs() < 1e-12);
    }

    #[test]
    #[should_panic(expected = "rate_hz must be positive")]
    fn zero_rate_rejected() {
        let _ = RealBuffer::new(0.0, vec![1.0]);
    }
}
