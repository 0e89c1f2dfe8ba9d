//! Per-epoch entropy series and the downstream statistics: correlation with
//! stage values, per-stage boxplots, and the ordered-medians check.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsp::EpochWindow;
use crate::hypnogram::{Hypnogram, HypnogramError, SleepStage};
use crate::ordinal::{permutation_entropy, OrdinalError, PatternParams, TieRule};
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("series lengths differ: {x} vs {y}")]
    LengthMismatch { x: usize, y: usize },
    #[error("correlation is undefined for a constant series")]
    ZeroVariance,
    #[error("no data points")]
    EmptyInput,
}

/// Normalized permutation entropy of one analysis window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochPeEntry<F> {
    pub epoch_index: usize,
    pub start_time_s: f64,
    pub pe: F,
}

/// Normalized PE per window, in window order.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochPeSeries<F: Scalar> {
    pub entries: Vec<EpochPeEntry<F>>,
    pub params: PatternParams,
}

impl<F: Scalar> EpochPeSeries<F> {
    /// `(start_time_s, pe)` pairs, the form stage alignment consumes.
    pub fn time_value_pairs(&self) -> Vec<(f64, F)> {
        self.entries
            .iter()
            .map(|e| (e.start_time_s, e.pe))
            .collect()
    }

    /// Shifts every window start time, e.g. to move from trimmed-signal time
    /// back to time since recording start.
    pub fn with_time_offset(mut self, offset_s: f64) -> Self {
        for e in self.entries.iter_mut() {
            e.start_time_s += offset_s;
        }
        self
    }
}

/// Computes the normalized PE of every window.
pub fn epoch_pe<F: Scalar>(
    windows: &[EpochWindow<F>],
    params: &PatternParams,
) -> Result<EpochPeSeries<F>, OrdinalError> {
    let entries = windows
        .iter()
        .map(|w| {
            Ok(EpochPeEntry {
                epoch_index: w.index,
                start_time_s: w.start_time_s,
                pe: permutation_entropy(&w.samples, params, true)?,
            })
        })
        .collect::<Result<Vec<_>, OrdinalError>>()?;
    Ok(EpochPeSeries {
        entries,
        params: *params,
    })
}

/// Matches scored epochs with PE windows like [`crate::hypnogram::align`]
/// but keeps the window index and start time, producing the rows the report
/// carries. Order follows the hypnogram; unmatched entries on either side
/// are dropped.
pub fn aligned_epochs<F: Scalar>(
    hypnogram: &Hypnogram,
    series: &EpochPeSeries<F>,
) -> Result<Vec<EpochRecord<F>>, HypnogramError> {
    let key = |t: f64| (t * 1e6).round() as i64;
    let by_time: std::collections::HashMap<i64, &EpochPeEntry<F>> = series
        .entries
        .iter()
        .map(|e| (key(e.start_time_s), e))
        .collect();
    let records: Vec<EpochRecord<F>> = hypnogram
        .epochs
        .iter()
        .filter_map(|&(onset, stage)| {
            by_time.get(&key(onset)).map(|e| EpochRecord {
                index: e.epoch_index,
                start_s: onset,
                stage,
                pe: e.pe,
            })
        })
        .collect();
    if records.is_empty() {
        return Err(HypnogramError::NoOverlap);
    }
    Ok(records)
}

/// Pearson correlation coefficient
/// `r = sum((x-mean(x))(y-mean(y))) / sqrt(sum((x-mean(x))^2) sum((y-mean(y))^2))`.
pub fn pearson_correlation<F: Scalar>(x: &[F], y: &[F]) -> Result<F, AnalysisError> {
    if x.len() != y.len() {
        return Err(AnalysisError::LengthMismatch {
            x: x.len(),
            y: y.len(),
        });
    }
    if x.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    let n = F::from_usize(x.len()).unwrap();
    let mean_x = x.iter().copied().sum::<F>() / n;
    let mean_y = y.iter().copied().sum::<F>() / n;
    let mut cov = F::zero();
    let mut var_x = F::zero();
    let mut var_y = F::zero();
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mean_x;
        let dy = b - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == F::zero() || var_y == F::zero() {
        return Err(AnalysisError::ZeroVariance);
    }
    let r = cov / (var_x * var_y).sqrt();
    Ok(r.min(F::one()).max(-F::one()))
}

/// Boxplot statistics of one stage's PE values: quartiles by linear
/// interpolation of the order statistics, whiskers at the most extreme data
/// within 1.5 interquartile ranges of the quartiles, outliers beyond them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageBoxplot<F> {
    pub stage: SleepStage,
    pub n: usize,
    pub q1: F,
    pub median: F,
    pub q3: F,
    pub whisker_low: F,
    pub whisker_high: F,
    pub outliers: Vec<F>,
}

/// Value at quantile `q` of ascending `sorted`, linearly interpolated at the
/// zero-based position `(n - 1) * q`.
fn quantile<F: Scalar>(sorted: &[F], q: f64) -> F {
    let pos = (sorted.len() - 1) as f64 * q;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = F::from_f64(pos - lo as f64).unwrap();
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Boxplot statistics per stage present in the pairs, in ascending stage
/// order (S4 first). Stages with no data are omitted.
pub fn stage_boxplots<F: Scalar>(
    pairs: &[(SleepStage, F)],
) -> Result<Vec<StageBoxplot<F>>, AnalysisError> {
    if pairs.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    let mut result = Vec::new();
    for stage in SleepStage::all() {
        let mut data: Vec<F> = pairs
            .iter()
            .filter(|(s, _)| *s == stage)
            .map(|&(_, v)| v)
            .collect();
        if data.is_empty() {
            continue;
        }
        data.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let q1 = quantile(&data, 0.25);
        let median = quantile(&data, 0.5);
        let q3 = quantile(&data, 0.75);
        let reach = F::from_f64(1.5).unwrap() * (q3 - q1);
        let (fence_low, fence_high) = (q1 - reach, q3 + reach);
        let whisker_low = *data.iter().find(|&&v| v >= fence_low).unwrap();
        let whisker_high = *data.iter().rev().find(|&&v| v <= fence_high).unwrap();
        let outliers: Vec<F> = data
            .iter()
            .copied()
            .filter(|&v| v < fence_low || v > fence_high)
            .collect();
        result.push(StageBoxplot {
            stage,
            n: data.len(),
            q1,
            median,
            q3,
            whisker_low,
            whisker_high,
            outliers,
        });
    }
    Ok(result)
}

/// True when the medians of the non-REM stages and wake never decrease in
/// the order S4, S3, S2, S1, wake. REM is left out: its entropy typically
/// sits between S1 and S2, off the numeric stage scale. Vacuously true for
/// fewer than two applicable stages.
pub fn monotonicity_check<F: Scalar>(boxplots: &[StageBoxplot<F>]) -> bool {
    let mut medians: Vec<(u8, F)> = boxplots
        .iter()
        .filter(|b| b.stage != SleepStage::Rem)
        .map(|b| (b.stage.value(), b.median))
        .collect();
    medians.sort_by_key(|&(v, _)| v);
    medians.windows(2).all(|w| w[0].1 <= w[1].1)
}

/// The preprocessing and pattern parameters a report was produced with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportParams {
    pub order: usize,
    pub delay: usize,
    /// `"stable-rank"` or `"noise(<seed>)"`.
    pub tie_rule: String,
    pub target_rate_hz: f64,
    pub cutoff_hz: f64,
    pub num_taps: usize,
    pub epoch_len_s: f64,
}

impl ReportParams {
    /// Formats the tie rule the way reports spell it.
    pub fn tie_rule_string(rule: TieRule) -> String {
        match rule {
            TieRule::StableRank => "stable-rank".to_string(),
            TieRule::Noise { seed } => format!("noise({seed})"),
        }
    }
}

/// Complete per-recording analysis: the aligned epochs plus the derived
/// statistics. Serializes to a stable JSON document (fields in declaration
/// order) and to a flat per-epoch CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport<F: Scalar> {
    pub patient_id: String,
    pub channel: String,
    pub params: ReportParams,
    pub epochs: Vec<EpochRecord<F>>,
    /// Pearson correlation between stage values and PE; absent when either
    /// series is constant.
    pub correlation: Option<F>,
    pub stages: Vec<StageBoxplot<F>>,
    pub monotonic_medians: bool,
}

/// One aligned epoch: where it sits in the night, its stage, and its PE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord<F> {
    pub index: usize,
    pub start_s: f64,
    pub stage: SleepStage,
    pub pe: F,
}

impl<F: Scalar + Serialize + for<'de> Deserialize<'de>> AnalysisReport<F> {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Writes the per-epoch table: `index,start_s,stage,pe`, PE with six
    /// decimal places.
    pub fn write_epoch_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "index,start_s,stage,pe")?;
        for e in &self.epochs {
            writeln!(
                w,
                "{},{},{},{:.6}",
                e.index,
                e.start_s,
                e.stage.label(),
                e.pe
            )?;
        }
        Ok(())
    }
}
