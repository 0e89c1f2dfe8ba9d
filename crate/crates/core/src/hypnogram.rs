//! Sleep-stage annotations: parsing, the numeric stage scale, and alignment
//! of stages with per-window values.
//!
//! Stages follow the six-value R&K scale, deep sleep low: S4=0, S3=1, S2=2,
//! S1=3, REM=4, wake=5. Two annotation syntaxes are accepted: a minimal TSV
//! (`onset_s<TAB>label` per line) and the scoring text files shipped with the
//! CAP sleep database, which carry wall-clock event times and mix stage rows
//! with CAP-cycle events.

use chrono::NaiveTime;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// Scoring epoch length used throughout: stages are assigned per 30 s.
pub const DEFAULT_EPOCH_LEN_S: f64 = 30.0;

#[derive(Debug, Error, PartialEq)]
pub enum HypnogramError {
    #[error("line {line}: unknown sleep stage label {label:?}")]
    UnknownStageLabel { label: String, line: usize },
    #[error("epoch {index}: onset {onset_s} s does not increase over the previous one")]
    NonMonotoneOnsets { index: usize, onset_s: f64 },
    #[error("no scored epochs found")]
    EmptyHypnogram,
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("no stage epoch coincides with any value window")]
    NoOverlap,
}

/// R&K sleep stage, ordered deepest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SleepStage {
    S4,
    S3,
    S2,
    S1,
    #[serde(rename = "REM")]
    Rem,
    #[serde(rename = "W")]
    Wake,
}

impl SleepStage {
    /// Numeric stage value: S4→0, S3→1, S2→2, S1→3, REM→4, wake→5.
    pub fn value(self) -> u8 {
        match self {
            SleepStage::S4 => 0,
            SleepStage::S3 => 1,
            SleepStage::S2 => 2,
            SleepStage::S1 => 3,
            SleepStage::Rem => 4,
            SleepStage::Wake => 5,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SleepStage::S4 => "S4",
            SleepStage::S3 => "S3",
            SleepStage::S2 => "S2",
            SleepStage::S1 => "S1",
            SleepStage::Rem => "REM",
            SleepStage::Wake => "W",
        }
    }

    /// All six stages in ascending numeric order.
    pub fn all() -> [SleepStage; 6] {
        [
            SleepStage::S4,
            SleepStage::S3,
            SleepStage::S2,
            SleepStage::S1,
            SleepStage::Rem,
            SleepStage::Wake,
        ]
    }
}

/// Normalizes an annotation label. `Ok(None)` marks scored-but-unusable
/// epochs (movement time, unscored) that are dropped rather than rejected.
fn normalize_label(label: &str) -> Result<Option<SleepStage>, ()> {
    let l = label.trim();
    match l.to_ascii_uppercase().as_str() {
        "W" | "WAKE" | "0" | "S0" => Ok(Some(SleepStage::Wake)),
        "R" | "REM" => Ok(Some(SleepStage::Rem)),
        "S1" | "1" => Ok(Some(SleepStage::S1)),
        "S2" | "2" => Ok(Some(SleepStage::S2)),
        "S3" | "3" => Ok(Some(SleepStage::S3)),
        "S4" | "4" => Ok(Some(SleepStage::S4)),
        "MT" | "M" | "MOVEMENT" | "?" | "U" | "UNSCORED" => Ok(None),
        _ => Err(()),
    }
}

/// One night of scored epochs. Onsets are seconds from the recording start,
/// strictly increasing; gaps are allowed where unusable epochs were dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypnogram {
    pub epochs: Vec<(f64, SleepStage)>,
    pub epoch_len_s: f64,
}

impl Hypnogram {
    /// Checks that at least one epoch exists and onsets strictly increase.
    pub fn new(epochs: Vec<(f64, SleepStage)>, epoch_len_s: f64) -> Result<Self, HypnogramError> {
        if epochs.is_empty() {
            return Err(HypnogramError::EmptyHypnogram);
        }
        for (i, pair) in epochs.windows(2).enumerate() {
            if pair[1].0 <= pair[0].0 {
                return Err(HypnogramError::NonMonotoneOnsets {
                    index: i + 1,
                    onset_s: pair[1].0,
                });
            }
        }
        Ok(Self {
            epochs,
            epoch_len_s,
        })
    }

    pub fn len(&self) -> usize {
        self.epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }

    /// Onset of the first scored epoch, in seconds from recording start.
    pub fn first_onset_s(&self) -> f64 {
        self.epochs[0].0
    }
}

/// Annotation syntax of the input text.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HypnogramFormat {
    /// `onset_s<TAB>stage_label`, one epoch per line.
    Tsv,
    /// CAP sleep database scoring text: free-form header lines, then a
    /// column-header row containing "Sleep Stage", "Time", "Event" and
    /// "Duration", then one row per event. Only 30 s sleep-stage rows are
    /// kept; CAP-cycle events (`MCAP-*`) are dropped. Event times are wall
    /// clock; `origin` anchors them to the recording start (falling back to
    /// the first event's time), and times past midnight wrap forward.
    CapTxt { origin: Option<NaiveTime> },
}

/// Parses annotation text into a [`Hypnogram`] with 30 s epochs.
pub fn parse_hypnogram(text: &str, format: HypnogramFormat) -> Result<Hypnogram, HypnogramError> {
    let epochs = match format {
        HypnogramFormat::Tsv => parse_tsv(text)?,
        HypnogramFormat::CapTxt { origin } => parse_cap_txt(text, origin)?,
    };
    Hypnogram::new(epochs, DEFAULT_EPOCH_LEN_S)
}

fn parse_tsv(text: &str) -> Result<Vec<(f64, SleepStage)>, HypnogramError> {
    let mut epochs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let (onset, label) =
            line.split_once('\t')
                .ok_or_else(|| HypnogramError::MalformedLine {
                    line: line_no,
                    reason: "expected onset<TAB>stage".into(),
                })?;
        let onset_s: f64 = onset
            .trim()
            .parse()
            .map_err(|_| HypnogramError::MalformedLine {
                line: line_no,
                reason: format!("onset {onset:?} is not a number"),
            })?;
        match normalize_label(label) {
            Ok(Some(stage)) => epochs.push((onset_s, stage)),
            Ok(None) => {} // movement time / unscored: dropped
            Err(()) => {
                return Err(HypnogramError::UnknownStageLabel {
                    label: label.trim().to_string(),
                    line: line_no,
                })
            }
        }
    }
    Ok(epochs)
}

/// Splits a CAP scoring row into fields: tab-separated in the database
/// export, with runs of two or more spaces accepted as a fallback (so the
/// two-word "Sleep Stage" column header survives splitting).
fn split_cap_fields(line: &str) -> Vec<&str> {
    if line.contains('\t') {
        line.split('\t').map(str::trim).collect()
    } else {
        line.split("  ")
            .map(str::trim)
            .filter(|f| !f.is_empty())
            .collect()
    }
}

fn parse_clock(text: &str) -> Option<NaiveTime> {
    NaiveTime::parse_from_str(text, "%H:%M:%S")
        .or_else(|_| NaiveTime::parse_from_str(text, "%H.%M.%S"))
        .ok()
}

/// Column positions found in the header row of a CAP scoring export. Only
/// the time column is guaranteed; the others vary between exports.
#[derive(Clone, Copy)]
struct CapColumns {
    stage: Option<usize>,
    time: usize,
    event: Option<usize>,
    duration: Option<usize>,
}

fn parse_cap_txt(
    text: &str,
    origin: Option<NaiveTime>,
) -> Result<Vec<(f64, SleepStage)>, HypnogramError> {
    // Locate the column-header row and the columns we need.
    let mut columns: Option<CapColumns> = None;
    let mut epochs = Vec::new();
    let mut origin_s: Option<f64> = origin.map(seconds_of_day);
    let mut prev_clock_s: Option<f64> = origin.map(seconds_of_day);
    let mut day_offset_s = 0.0;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }

        let fields = split_cap_fields(line);
        let Some(cols) = columns else {
            if line.to_ascii_lowercase().contains("sleep stage") {
                let find = |name: &str| {
                    fields
                        .iter()
                        .position(|f| f.to_ascii_lowercase().starts_with(name))
                };
                let time = find("time").ok_or_else(|| HypnogramError::MalformedLine {
                    line: line_no,
                    reason: "header row lacks a Time column".into(),
                })?;
                columns = Some(CapColumns {
                    stage: find("sleep stage"),
                    time,
                    event: find("event"),
                    duration: find("duration"),
                });
            }
            continue; // free-form preamble before the header row
        };

        // Classify the row by its event name when present: SLEEP-* rows are
        // stage epochs, MCAP-* rows are CAP cycle events to drop.
        let event = cols
            .event
            .and_then(|c| fields.get(c))
            .copied()
            .unwrap_or("");
        if event.starts_with("MCAP") {
            continue;
        }

        let stage_label = cols
            .stage
            .and_then(|c| fields.get(c))
            .copied()
            .unwrap_or("");
        let stage = match normalize_label(stage_label) {
            Ok(s) => s,
            // Fall back to the event suffix (SLEEP-S0 .. SLEEP-REM).
            Err(()) => match event.strip_prefix("SLEEP-").map(normalize_label) {
                Some(Ok(s)) => s,
                _ if event.starts_with("SLEEP-") || !stage_label.is_empty() => {
                    return Err(HypnogramError::UnknownStageLabel {
                        label: stage_label.to_string(),
                        line: line_no,
                    })
                }
                _ => continue, // neither a stage label nor a stage event
            },
        };

        // Keep whole scoring epochs only.
        if let Some(duration) = cols.duration.and_then(|c| fields.get(c)) {
            if duration.parse::<f64>().ok() != Some(DEFAULT_EPOCH_LEN_S) {
                continue;
            }
        }

        let clock = fields
            .get(cols.time)
            .copied()
            .and_then(parse_clock)
            .ok_or_else(|| HypnogramError::MalformedLine {
                line: line_no,
                reason: "event time is not hh:mm:ss".into(),
            })?;
        let clock_s = seconds_of_day(clock);
        if let Some(prev) = prev_clock_s {
            if clock_s < prev {
                day_offset_s += 86_400.0; // wrapped past midnight
            }
        }
        prev_clock_s = Some(clock_s);
        let origin_s = *origin_s.get_or_insert(clock_s);
        let onset_s = clock_s + day_offset_s - origin_s;

        if let Some(stage) = stage {
            epochs.push((onset_s, stage));
        }
    }

    if columns.is_none() {
        return Err(HypnogramError::MalformedLine {
            line: 1,
            reason: "no 'Sleep Stage' header row found".into(),
        });
    }
    Ok(epochs)
}

fn seconds_of_day(t: NaiveTime) -> f64 {
    use chrono::Timelike;
    f64::from(t.num_seconds_from_midnight())
}

/// Pairs scored epochs with per-window values by matching window start times
/// to epoch onsets (within a microsecond). Windows without a stage and
/// epochs without a window are dropped; order follows the hypnogram.
pub fn align<F: Scalar>(
    hypnogram: &Hypnogram,
    windows: &[(f64, F)],
) -> Result<Vec<(SleepStage, F)>, HypnogramError> {
    let key = |t: f64| (t * 1e6).round() as i64;
    let by_time: std::collections::HashMap<i64, F> =
        windows.iter().map(|&(t, v)| (key(t), v)).collect();
    let pairs: Vec<(SleepStage, F)> = hypnogram
        .epochs
        .iter()
        .filter_map(|&(onset, stage)| by_time.get(&key(onset)).map(|&v| (stage, v)))
        .collect();
    if pairs.is_empty() {
        return Err(HypnogramError::NoOverlap);
    }
    Ok(pairs)
}
