//! `analyze`: the full pipeline from one EDF recording plus its hypnogram to
//! an analysis report.
//!
//! Steps, in order: read the EEG channel (with fallbacks), resample to the
//! target rate, low-pass filter, anchor the window grid at the first scored
//! epoch, window, compute per-window PE, align windows with stages, then
//! derive correlation, per-stage boxplots, and the ordered-medians verdict.

use sleep_pe::analysis::{self, AnalysisError, ReportParams};
use sleep_pe::dsp::{self, FilterSpec};
use sleep_pe::edf::{EdfError, EdfRecording};
use sleep_pe::hypnogram::{parse_hypnogram, HypnogramFormat, SleepStage};
use sleep_pe::signal::Rate;
use sleep_pe::{PatternParams, Report, Signal};

use crate::error::CliError;
use crate::output::{read_to_string, write_atomic};
use crate::{AnalyzeArgs, HypnogramFormatArg, OutputFormat};

pub fn run(args: AnalyzeArgs) -> Result<(), CliError> {
    if args.format.contains(&OutputFormat::Svg) {
        return Err(CliError::param("format svg applies to the boxplot command"));
    }

    // Validate parameters before touching any file.
    let tie_rule = args.tie_rule.to_rule(args.tie_seed);
    let params = PatternParams::new(args.order, args.delay)?.with_tie_rule(tie_rule);
    let spec = FilterSpec::lowpass(args.cutoff, args.taps)?;

    let recording = EdfRecording::open(&args.edf).map_err(|e| match e {
        EdfError::Io(io) => CliError::file(format!("{}: {io}", args.edf.display())),
        other => other.into(),
    })?;
    let (chosen, signal) = pick_channel(&recording, &args)?;
    eprintln!(
        "channel {chosen}: {} samples at {} Hz",
        signal.len(),
        signal.rate_hz()
    );

    let hypnogram_text = read_to_string(&args.hypnogram)?;
    let format = hypnogram_format(&args, &hypnogram_text, &recording);
    let hypnogram = parse_hypnogram(&hypnogram_text, format)?;

    let resampled = dsp::resample(&signal, Rate::from_integer(args.rate))?;
    let filtered = dsp::lowpass(&resampled, &spec)?;

    // Scoring may start some way into the recording; anchor the window grid
    // at the first scored epoch so window starts land on epoch onsets.
    let skip = (hypnogram.first_onset_s() * filtered.rate_hz()).round() as usize;
    let trimmed = filtered.skip_samples(skip);
    if trimmed.is_empty() {
        return Err(CliError::format(
            "hypnogram begins after the recording ends",
        ));
    }
    let epoch_samples = (args.epoch_seconds * args.rate) as usize;
    let windows = dsp::window(&trimmed, epoch_samples)?;
    let series =
        analysis::epoch_pe(&windows, &params)?.with_time_offset(skip as f64 / filtered.rate_hz());

    let epochs = analysis::aligned_epochs(&hypnogram, &series)?;
    let stage_values: Vec<f64> = epochs.iter().map(|r| f64::from(r.stage.value())).collect();
    let pe_values: Vec<f64> = epochs.iter().map(|r| r.pe).collect();
    let correlation = match analysis::pearson_correlation(&stage_values, &pe_values) {
        Ok(r) => Some(r),
        Err(AnalysisError::ZeroVariance) => None,
        Err(e) => return Err(e.into()),
    };
    let pairs: Vec<(SleepStage, f64)> = epochs.iter().map(|r| (r.stage, r.pe)).collect();
    let stages = analysis::stage_boxplots(&pairs)?;
    let monotonic_medians = analysis::monotonicity_check(&stages);
    eprintln!(
        "aligned {} of {} scored epochs; correlation {}",
        epochs.len(),
        hypnogram.len(),
        correlation.map_or("n/a".to_string(), |r| format!("{r:.4}"))
    );

    let report = Report {
        patient_id: patient_id(&args, &recording),
        channel: chosen,
        params: ReportParams {
            order: args.order,
            delay: args.delay,
            tie_rule: ReportParams::tie_rule_string(tie_rule),
            target_rate_hz: args.rate as f64,
            cutoff_hz: args.cutoff,
            num_taps: args.taps,
            epoch_len_s: args.epoch_seconds as f64,
        },
        epochs,
        correlation,
        stages,
        monotonic_medians,
    };

    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::file(format!("{}: {e}", args.out.display())))?;
    let stem = args
        .edf
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "recording".to_string());
    if args.format.contains(&OutputFormat::Report) {
        let path = args.out.join(format!("{stem}.report.json"));
        write_atomic(&path, report.to_json().as_bytes())?;
    }
    if args.format.contains(&OutputFormat::Csv) {
        let mut buf = Vec::new();
        report
            .write_epoch_csv(&mut buf)
            .expect("write to memory buffer");
        let path = args.out.join(format!("{stem}.epochs.csv"));
        write_atomic(&path, &buf)?;
    }
    Ok(())
}

/// Tries the preferred channel, then the fallback list, in order. Channels
/// that are absent are skipped; any other read failure is fatal.
fn pick_channel(
    recording: &EdfRecording,
    args: &AnalyzeArgs,
) -> Result<(String, Signal), CliError> {
    let candidates: Vec<&String> = args.channel.iter().chain(args.fallback.iter()).collect();
    for label in &candidates {
        match recording.read_channel::<f64>(label) {
            Ok(signal) => return Ok((label.trim().to_string(), signal)),
            Err(EdfError::UnknownChannel(_)) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    let tried: Vec<String> = candidates.iter().map(|s| s.trim().to_string()).collect();
    let available: Vec<String> = recording
        .list_channels()
        .into_iter()
        .filter(|c| !c.is_annotation)
        .map(|c| c.label)
        .collect();
    Err(CliError::channel(format!(
        "no channel matching any of [{}]; recording has [{}]",
        tried.join(", "),
        available.join(", ")
    )))
}

fn hypnogram_format(args: &AnalyzeArgs, text: &str, recording: &EdfRecording) -> HypnogramFormat {
    let cap = HypnogramFormat::CapTxt {
        origin: Some(recording.header.start_datetime.time()),
    };
    match args.hypnogram_format {
        HypnogramFormatArg::Tsv => HypnogramFormat::Tsv,
        HypnogramFormatArg::CapTxt => cap,
        HypnogramFormatArg::Auto => {
            if text.to_ascii_lowercase().contains("sleep stage") {
                cap
            } else {
                HypnogramFormat::Tsv
            }
        }
    }
}

fn patient_id(args: &AnalyzeArgs, recording: &EdfRecording) -> String {
    args.patient_id
        .clone()
        .filter(|s| !s.trim().is_empty())
        .or_else(|| {
            let id = recording.header.patient_id.trim().to_string();
            (!id.is_empty()).then_some(id)
        })
        .unwrap_or_else(|| {
            args.edf
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "unknown".to_string())
        })
}
