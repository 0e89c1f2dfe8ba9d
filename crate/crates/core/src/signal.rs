//! Uniformly sampled signals.

use num_rational::Ratio;

use crate::scalar::Scalar;

/// Sample rate in Hz as an exact rational.
///
/// EDF files define the rate as `samples_per_record / record_duration`, both
/// integers (the duration may itself be a decimal fraction), so rates are
/// rationals by construction. Keeping them exact lets the resampler derive
/// its up/down factors without float round-off.
pub type Rate = Ratio<u64>;

/// A uniformly sampled real-valued series in physical units.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal<F: Scalar> {
    /// Sample values in physical units (µV for EEG channels).
    pub samples: Vec<F>,
    /// Sample rate in Hz.
    pub rate: Rate,
    /// Channel label, e.g. `"Fp2-F4"`.
    pub label: String,
}

impl<F: Scalar> SampledSignal<F> {
    pub fn new(samples: Vec<F>, rate: Rate, label: impl Into<String>) -> Self {
        Self {
            samples,
            rate,
            label: label.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sample rate as a float, for display and time arithmetic.
    pub fn rate_hz(&self) -> f64 {
        *self.rate.numer() as f64 / *self.rate.denom() as f64
    }

    /// Total duration in seconds.
    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.rate_hz()
    }

    /// Drops the first `n` samples, keeping rate and label.
    pub fn skip_samples(&self, n: usize) -> Self {
        Self {
            samples: self.samples.get(n..).unwrap_or(&[]).to_vec(),
            rate: self.rate,
            label: self.label.clone(),
        }
    }
}
