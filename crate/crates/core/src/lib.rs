//! Permutation entropy analysis of sleep EEG recordings.
//!
//! The crate covers the full path from raw polysomnography files to
//! per-sleep-stage entropy statistics:
//!
//! ```text
//! EDF file --> channel extraction --> resample + low-pass --> windows
//!                                                               |
//! hypnogram ----------------------------> stage labels          v
//!        \                                       \        permutation
//!         `--> align stages with windows <--------`        entropy
//!                        |
//!                        v
//!        correlation, boxplots, monotonicity
//! ```
//!
//! Every numeric routine is generic over the sample scalar (`f32` or `f64`)
//! through the [`Scalar`] trait; the aliases at the crate root fix `f64`,
//! which is what the bundled command-line tool uses.

pub mod analysis;
pub mod dsp;
pub mod edf;
pub mod hypnogram;
pub mod ordinal;
pub mod scalar;
pub mod signal;

pub use ordinal::{
    encode_pattern, pattern_count, pattern_distribution, permutation_entropy, shannon_entropy,
    OrdinalDistribution, OrdinalError, OrdinalPattern, PatternParams, TieRule, MAX_ORDER,
};
pub use scalar::Scalar;
pub use signal::{Rate, SampledSignal};

/// A sampled signal with `f64` samples, the precision used end to end by the
/// command-line tool.
pub type Signal = SampledSignal<f64>;

/// An epoch window over `f64` samples.
pub type Epoch = dsp::EpochWindow<f64>;

/// Per-epoch entropy series with `f64` values.
pub type EpochPe = analysis::EpochPeSeries<f64>;

/// Per-stage boxplot statistics over `f64` values.
pub type StageBox = analysis::StageBoxplot<f64>;

/// Full analysis output over `f64` values.
pub type Report = analysis::AnalysisReport<f64>;
