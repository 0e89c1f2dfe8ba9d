//! EDF (European Data Format) reader: fixed-width ASCII header, per-signal
//! metadata block, and 16-bit little-endian sample records mapped to
//! physical units.
//!
//! EDF+ continuous files (`EDF+C`) are read as plain EDF; discontinuous
//! files (`EDF+D`) are rejected because downstream windowing assumes gapless
//! time. Annotation channels are surfaced by [`EdfRecording::list_channels`]
//! but never returned as signals.
//!
//! Parsed headers keep each field's original text (minus trailing padding),
//! so [`serialize_header`] reproduces the source bytes exactly up to
//! trailing-space padding even for files with unusual numeric spellings.

use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime, NaiveTime};
use num_rational::Ratio;
use thiserror::Error;

use crate::scalar::Scalar;
use crate::signal::{Rate, SampledSignal};

#[derive(Debug, Error)]
pub enum EdfError {
    #[error("file too short: header needs {needed} bytes, found {got}")]
    TruncatedHeader { needed: usize, got: usize },
    #[error("header field {field} is not numeric: {value:?}")]
    NonNumericField { field: String, value: String },
    #[error("unsupported EDF variant: {0}")]
    UnsupportedVariant(String),
    #[error("channel {0:?} not found")]
    UnknownChannel(String),
    #[error("channel label {0:?} matches more than one signal")]
    AmbiguousChannel(String),
    #[error("data truncated: header promises {expected} bytes of samples, file has {actual}")]
    TruncatedData { expected: usize, actual: usize },
    #[error("channel {label:?} has an unusable calibration range")]
    BadCalibration { label: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

const HEADER_LEN: usize = 256;
const PER_SIGNAL_LEN: usize = 256;
const ANNOTATION_LABEL: &str = "EDF Annotations";

/// The fixed 256-byte header. String fields hold the original text with
/// trailing padding stripped; numeric fields are parsed alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct EdfHeader {
    pub version: String,
    pub patient_id: String,
    pub recording_id: String,
    pub start_datetime: NaiveDateTime,
    pub header_bytes: usize,
    /// 44-byte reserved field; `EDF+C`/`EDF+D` files flag themselves here.
    pub reserved: String,
    pub num_data_records: u64,
    pub record_duration_s: Rate,
    pub num_signals: usize,
    raw: RawHeaderFields,
}

/// Original spellings of the derived header fields, for round-tripping.
#[derive(Debug, Clone, PartialEq)]
struct RawHeaderFields {
    date: String,
    time: String,
    header_bytes: String,
    num_records: String,
    duration: String,
    num_signals: String,
}

/// Metadata of one signal from the 256-byte-per-signal block.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMeta {
    pub label: String,
    pub transducer: String,
    pub physical_dim: String,
    pub phys_min: f64,
    pub phys_max: f64,
    pub dig_min: i32,
    pub dig_max: i32,
    pub prefilter: String,
    pub samples_per_record: usize,
    pub reserved: String,
    raw: RawChannelFields,
}

#[derive(Debug, Clone, PartialEq)]
struct RawChannelFields {
    phys_min: String,
    phys_max: String,
    dig_min: String,
    dig_max: String,
    samples_per_record: String,
}

impl ChannelMeta {
    pub fn is_annotation(&self) -> bool {
        self.label.trim() == ANNOTATION_LABEL
    }
}

/// One row of [`EdfRecording::list_channels`].
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelInfo {
    pub label: String,
    pub sample_rate_hz: Rate,
    pub is_annotation: bool,
}

fn raw_field(bytes: &[u8], start: usize, len: usize) -> String {
    String::from_utf8_lossy(&bytes[start..start + len])
        .trim_end_matches([' ', '\0'])
        .to_string()
}

fn parse_usize(raw: &str, field: &str) -> Result<usize, EdfError> {
    raw.trim().parse().map_err(|_| EdfError::NonNumericField {
        field: field.to_string(),
        value: raw.trim().to_string(),
    })
}

fn parse_f64(raw: &str, field: &str) -> Result<f64, EdfError> {
    raw.trim().parse().map_err(|_| EdfError::NonNumericField {
        field: field.to_string(),
        value: raw.trim().to_string(),
    })
}

fn parse_i32(raw: &str, field: &str) -> Result<i32, EdfError> {
    raw.trim().parse().map_err(|_| EdfError::NonNumericField {
        field: field.to_string(),
        value: raw.trim().to_string(),
    })
}

/// Parses a nonnegative decimal like `30` or `0.5` into an exact rational.
fn parse_decimal_rational(raw: &str, field: &str) -> Result<Ratio<u64>, EdfError> {
    let err = || EdfError::NonNumericField {
        field: field.to_string(),
        value: raw.trim().to_string(),
    };
    let s = raw.trim();
    let (int_part, frac_part) = s.split_once('.').unwrap_or((s, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    let digits = |p: &str| p.is_empty() || p.bytes().all(|b| b.is_ascii_digit());
    if !digits(int_part) || !digits(frac_part) {
        return Err(err());
    }
    let int: u64 = if int_part.is_empty() {
        0
    } else {
        int_part.parse().map_err(|_| err())?
    };
    let frac: u64 = if frac_part.is_empty() {
        0
    } else {
        frac_part.parse().map_err(|_| err())?
    };
    let denom = 10u64.pow(frac_part.len() as u32);
    Ok(Ratio::new(int * denom + frac, denom))
}

/// EDF start date is `dd.mm.yy` with a 1985 pivot: years 85–99 are 19xx,
/// 00–84 are 20xx. Time is `hh.mm.ss` (a few exports use colons).
fn parse_start_datetime(date: &str, time: &str) -> Result<NaiveDateTime, EdfError> {
    let bad = |field: &str, value: &str| EdfError::NonNumericField {
        field: field.to_string(),
        value: value.to_string(),
    };
    let d: Vec<&str> = date.trim().split(['.', ':']).collect();
    let t: Vec<&str> = time.trim().split(['.', ':']).collect();
    if d.len() != 3 {
        return Err(bad("start_date", date.trim()));
    }
    if t.len() != 3 {
        return Err(bad("start_time", time.trim()));
    }
    let num = |s: &str, field: &str, value: &str| -> Result<u32, EdfError> {
        s.trim().parse().map_err(|_| bad(field, value))
    };
    let (day, month, yy) = (
        num(d[0], "start_date", date)?,
        num(d[1], "start_date", date)?,
        num(d[2], "start_date", date)?,
    );
    let year = if yy >= 85 { 1900 + yy } else { 2000 + yy };
    let date_val = NaiveDate::from_ymd_opt(year as i32, month, day)
        .ok_or_else(|| bad("start_date", date.trim()))?;
    let time_val = NaiveTime::from_hms_opt(
        num(t[0], "start_time", time)?,
        num(t[1], "start_time", time)?,
        num(t[2], "start_time", time)?,
    )
    .ok_or_else(|| bad("start_time", time.trim()))?;
    Ok(date_val.and_time(time_val))
}

/// Decodes the fixed header and the per-signal metadata block.
pub fn parse_header(bytes: &[u8]) -> Result<(EdfHeader, Vec<ChannelMeta>), EdfError> {
    if bytes.len() < HEADER_LEN {
        return Err(EdfError::TruncatedHeader {
            needed: HEADER_LEN,
            got: bytes.len(),
        });
    }

    let version = raw_field(bytes, 0, 8);
    let patient_id = raw_field(bytes, 8, 80);
    let recording_id = raw_field(bytes, 88, 80);
    let raw = RawHeaderFields {
        date: raw_field(bytes, 168, 8),
        time: raw_field(bytes, 176, 8),
        header_bytes: raw_field(bytes, 184, 8),
        num_records: raw_field(bytes, 236, 8),
        duration: raw_field(bytes, 244, 8),
        num_signals: raw_field(bytes, 252, 4),
    };
    let reserved = raw_field(bytes, 192, 44);

    if reserved.starts_with("EDF+D") {
        return Err(EdfError::UnsupportedVariant(
            "EDF+D discontinuous recordings are not supported".to_string(),
        ));
    }

    let start_datetime = parse_start_datetime(&raw.date, &raw.time)?;
    let header_bytes = parse_usize(&raw.header_bytes, "header_bytes")?;
    let num_records_signed: i64 =
        raw.num_records
            .trim()
            .parse()
            .map_err(|_| EdfError::NonNumericField {
                field: "num_data_records".to_string(),
                value: raw.num_records.trim().to_string(),
            })?;
    if num_records_signed < 1 {
        return Err(EdfError::UnsupportedVariant(format!(
            "record count {num_records_signed} (files with an unknown or empty record count are rejected)"
        )));
    }
    let num_data_records = num_records_signed as u64;
    let record_duration_s = parse_decimal_rational(&raw.duration, "record_duration")?;
    if *record_duration_s.numer() == 0 {
        return Err(EdfError::NonNumericField {
            field: "record_duration".to_string(),
            value: raw.duration.trim().to_string(),
        });
    }
    let num_signals = parse_usize(&raw.num_signals, "num_signals")?;

    let needed = HEADER_LEN + PER_SIGNAL_LEN * num_signals;
    if bytes.len() < needed {
        return Err(EdfError::TruncatedHeader {
            needed,
            got: bytes.len(),
        });
    }

    // The per-signal block is column-major: all labels, then all
    // transducers, and so on.
    let mut cursor = HEADER_LEN;
    let mut take = |width: usize| -> Vec<String> {
        let start = cursor;
        cursor += width * num_signals;
        (0..num_signals)
            .map(|i| raw_field(bytes, start + i * width, width))
            .collect()
    };
    let labels = take(16);
    let transducers = take(80);
    let dims = take(8);
    let phys_mins = take(8);
    let phys_maxs = take(8);
    let dig_mins = take(8);
    let dig_maxs = take(8);
    let prefilters = take(80);
    let sprs = take(8);
    let reserveds = take(32);

    let mut channels = Vec::with_capacity(num_signals);
    for i in 0..num_signals {
        channels.push(ChannelMeta {
            label: labels[i].clone(),
            transducer: transducers[i].clone(),
            physical_dim: dims[i].clone(),
            phys_min: parse_f64(&phys_mins[i], &format!("phys_min[{i}]"))?,
            phys_max: parse_f64(&phys_maxs[i], &format!("phys_max[{i}]"))?,
            dig_min: parse_i32(&dig_mins[i], &format!("dig_min[{i}]"))?,
            dig_max: parse_i32(&dig_maxs[i], &format!("dig_max[{i}]"))?,
            prefilter: prefilters[i].clone(),
            samples_per_record: parse_usize(&sprs[i], &format!("samples_per_record[{i}]"))?,
            reserved: reserveds[i].clone(),
            raw: RawChannelFields {
                phys_min: phys_mins[i].clone(),
                phys_max: phys_maxs[i].clone(),
                dig_min: dig_mins[i].clone(),
                dig_max: dig_maxs[i].clone(),
                samples_per_record: sprs[i].clone(),
            },
        });
    }

    Ok((
        EdfHeader {
            version,
            patient_id,
            recording_id,
            start_datetime,
            header_bytes,
            reserved,
            num_data_records,
            record_duration_s,
            num_signals,
            raw,
        },
        channels,
    ))
}

fn push_padded(out: &mut Vec<u8>, text: &str, width: usize) {
    let bytes = text.as_bytes();
    debug_assert!(bytes.len() <= width, "field {text:?} exceeds {width} bytes");
    let take = bytes.len().min(width);
    out.extend_from_slice(&bytes[..take]);
    out.extend(std::iter::repeat_n(b' ', width - take));
}

/// Re-encodes a parsed header to the fixed-width ASCII layout. Applied to
/// the output of [`parse_header`], this reproduces the source bytes exactly
/// up to trailing-space padding.
pub fn serialize_header(header: &EdfHeader, channels: &[ChannelMeta]) -> Vec<u8> {
    let ns = channels.len();
    let mut out = Vec::with_capacity(HEADER_LEN + PER_SIGNAL_LEN * ns);
    push_padded(&mut out, &header.version, 8);
    push_padded(&mut out, &header.patient_id, 80);
    push_padded(&mut out, &header.recording_id, 80);
    push_padded(&mut out, &header.raw.date, 8);
    push_padded(&mut out, &header.raw.time, 8);
    push_padded(&mut out, &header.raw.header_bytes, 8);
    push_padded(&mut out, &header.reserved, 44);
    push_padded(&mut out, &header.raw.num_records, 8);
    push_padded(&mut out, &header.raw.duration, 8);
    push_padded(&mut out, &header.raw.num_signals, 4);

    for c in channels {
        push_padded(&mut out, &c.label, 16);
    }
    for c in channels {
        push_padded(&mut out, &c.transducer, 80);
    }
    for c in channels {
        push_padded(&mut out, &c.physical_dim, 8);
    }
    for c in channels {
        push_padded(&mut out, &c.raw.phys_min, 8);
    }
    for c in channels {
        push_padded(&mut out, &c.raw.phys_max, 8);
    }
    for c in channels {
        push_padded(&mut out, &c.raw.dig_min, 8);
    }
    for c in channels {
        push_padded(&mut out, &c.raw.dig_max, 8);
    }
    for c in channels {
        push_padded(&mut out, &c.prefilter, 80);
    }
    for c in channels {
        push_padded(&mut out, &c.raw.samples_per_record, 8);
    }
    for c in channels {
        push_padded(&mut out, &c.reserved, 32);
    }
    out
}

/// A fully loaded EDF file: parsed header plus the raw record payload.
/// Immutable after parsing, so it may be shared freely across threads.
#[derive(Debug, Clone)]
pub struct EdfRecording {
    pub header: EdfHeader,
    pub channels: Vec<ChannelMeta>,
    bytes: Vec<u8>,
    data_start: usize,
}

impl EdfRecording {
    pub fn parse(bytes: Vec<u8>) -> Result<Self, EdfError> {
        let (header, channels) = parse_header(&bytes)?;
        // Data records begin right after the per-signal block, whose size
        // follows from the signal count.
        let data_start = HEADER_LEN + PER_SIGNAL_LEN * channels.len();
        Ok(Self {
            header,
            channels,
            bytes,
            data_start,
        })
    }

    pub fn open(path: impl AsRef<Path>) -> Result<Self, EdfError> {
        Self::parse(std::fs::read(path)?)
    }

    /// Sample rate of a channel: `samples_per_record / record_duration_s`.
    pub fn sample_rate(&self, meta: &ChannelMeta) -> Rate {
        Ratio::from_integer(meta.samples_per_record as u64) / self.header.record_duration_s
    }

    /// One entry per signal, in file order, annotation channels flagged.
    pub fn list_channels(&self) -> Vec<ChannelInfo> {
        self.channels
            .iter()
            .map(|c| ChannelInfo {
                label: c.label.trim().to_string(),
                sample_rate_hz: self.sample_rate(c),
                is_annotation: c.is_annotation(),
            })
            .collect()
    }

    /// Extracts one channel by exact (whitespace-trimmed, case-sensitive)
    /// label match and maps its digital samples to physical units with the
    /// affine calibration
    /// `p = (d - dig_min) * (phys_max - phys_min) / (dig_max - dig_min) + phys_min`.
    /// Annotation channels never match.
    pub fn read_channel<F: Scalar>(&self, label: &str) -> Result<SampledSignal<F>, EdfError> {
        let query = label.trim();
        let mut matches = self
            .channels
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_annotation() && c.label.trim() == query);
        let (index, meta) = matches
            .next()
            .ok_or_else(|| EdfError::UnknownChannel(query.to_string()))?;
        if matches.next().is_some() {
            return Err(EdfError::AmbiguousChannel(query.to_string()));
        }

        if meta.dig_min >= meta.dig_max
            || meta.phys_min == meta.phys_max
            || meta.samples_per_record == 0
        {
            return Err(EdfError::BadCalibration {
                label: query.to_string(),
            });
        }

        let record_size: usize = self.channels.iter().map(|c| 2 * c.samples_per_record).sum();
        let records = self.header.num_data_records as usize;
        let expected = records * record_size;
        let data = &self.bytes[self.data_start..];
        if data.len() < expected {
            return Err(EdfError::TruncatedData {
                expected,
                actual: data.len(),
            });
        }

        let channel_offset: usize = self.channels[..index]
            .iter()
            .map(|c| 2 * c.samples_per_record)
            .sum();
        let spr = meta.samples_per_record;
        let dig_min = f64::from(meta.dig_min);
        let dig_span = f64::from(meta.dig_max - meta.dig_min);
        let phys_span = meta.phys_max - meta.phys_min;

        let mut samples = Vec::with_capacity(records * spr);
        for r in 0..records {
            let base = r * record_size + channel_offset;
            for s in 0..spr {
                let at = base + 2 * s;
                let d = i16::from_le_bytes([data[at], data[at + 1]]);
                let p = (f64::from(d) - dig_min) * phys_span / dig_span + meta.phys_min;
                samples.push(F::from_f64(p).unwrap());
            }
        }

        Ok(SampledSignal::new(
            samples,
            self.sample_rate(meta),
            query.to_string(),
        ))
    }
}
