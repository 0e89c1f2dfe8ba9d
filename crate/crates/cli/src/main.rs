//! `sleep-pe`: batch permutation entropy analysis of sleep EEG recordings.
//!
//! Four subcommands cover the pipeline and its test harness:
//!
//! - `analyze` — EDF + hypnogram in, per-epoch PE, correlation, and
//!   per-stage boxplot statistics out (JSON report + epoch CSV).
//! - `pe` — normalized permutation entropy of a plain numeric series.
//! - `synth` — deterministic test signals (ramp, sine, seeded noise).
//! - `boxplot` — SVG figure and CSV table from an analysis report.
//!
//! Every flag can also be set through an environment variable with the
//! `SLEEP_PE_` prefix (e.g. `SLEEP_PE_ORDER=4`). Errors print a single
//! `error[<category>]: <message>` line on stderr and exit with a code
//! per category: file 10, format 11, channel 12, param 13.

mod analyze;
mod boxplot;
mod error;
mod output;
mod pe;
mod synth;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use sleep_pe::TieRule;

use error::CliError;

#[derive(Parser)]
#[command(
    name = "sleep-pe",
    version,
    about = "Permutation entropy analysis of sleep EEG recordings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline: resample, low-pass, window, PE, stage statistics
    Analyze(AnalyzeArgs),
    /// Print the normalized permutation entropy of a numeric series
    Pe(PeArgs),
    /// Generate a deterministic test signal, one value per line
    Synth(SynthArgs),
    /// Render boxplot SVG and CSV from an analysis report
    Boxplot(BoxplotArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    /// JSON analysis report
    Report,
    /// Flat tables (per-epoch for analyze, per-stage for boxplot)
    Csv,
    /// Boxplot figure
    Svg,
}

#[derive(Clone, Copy, ValueEnum)]
enum TieRuleArg {
    /// Equal values ranked by position (deterministic)
    StableRank,
    /// Equal values separated by seeded pseudo-random perturbations
    Noise,
}

impl TieRuleArg {
    fn to_rule(self, seed: u64) -> TieRule {
        match self {
            TieRuleArg::StableRank => TieRule::StableRank,
            TieRuleArg::Noise => TieRule::Noise { seed },
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum HypnogramFormatArg {
    /// CAP scoring text when a "Sleep Stage" header is present, TSV otherwise
    Auto,
    Tsv,
    CapTxt,
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    /// 0, 1, 2, ...
    Ramp,
    /// sin(2 pi f t) sampled at the given rate
    Sine,
    /// i.i.d. uniform values in [0, 1) from a seeded ChaCha8 stream
    Noise,
}

#[derive(clap::Args)]
struct AnalyzeArgs {
    /// EDF recording to analyze
    #[arg(long, env = "SLEEP_PE_EDF")]
    edf: PathBuf,
    /// Sleep-stage annotations (TSV or CAP scoring text)
    #[arg(long, env = "SLEEP_PE_HYPNOGRAM")]
    hypnogram: PathBuf,
    /// Preferred EEG channel; tried before the fallback list
    #[arg(long, env = "SLEEP_PE_CHANNEL")]
    channel: Option<String>,
    /// Channels tried in order when the preferred one is absent
    #[arg(
        long,
        env = "SLEEP_PE_FALLBACK",
        value_delimiter = ',',
        num_args = 0..,
        default_values = ["Fp2-F4", "C3-A2"]
    )]
    fallback: Vec<String>,
    /// Pattern order m
    #[arg(long, env = "SLEEP_PE_ORDER", default_value_t = 3)]
    order: usize,
    /// Time delay tau
    #[arg(long, env = "SLEEP_PE_DELAY", default_value_t = 1)]
    delay: usize,
    /// Target sample rate in Hz
    #[arg(long, env = "SLEEP_PE_RATE", default_value_t = 200)]
    rate: u64,
    /// Low-pass cutoff in Hz
    #[arg(long, env = "SLEEP_PE_CUTOFF", default_value_t = 30.0)]
    cutoff: f64,
    /// Low-pass kernel length (odd)
    #[arg(long, env = "SLEEP_PE_TAPS", default_value_t = 201)]
    taps: usize,
    /// Scoring epoch length in seconds
    #[arg(long, env = "SLEEP_PE_EPOCH_SECONDS", default_value_t = 30)]
    epoch_seconds: u64,
    /// How equal values inside a tuple are ranked
    #[arg(
        long,
        env = "SLEEP_PE_TIE_RULE",
        value_enum,
        default_value = "stable-rank"
    )]
    tie_rule: TieRuleArg,
    /// Seed for the noise tie rule
    #[arg(long, env = "SLEEP_PE_TIE_SEED", default_value_t = 0)]
    tie_seed: u64,
    /// Annotation syntax; auto sniffs the file content
    #[arg(
        long,
        env = "SLEEP_PE_HYPNOGRAM_FORMAT",
        value_enum,
        default_value = "auto"
    )]
    hypnogram_format: HypnogramFormatArg,
    /// Patient identifier for the report (default: EDF header, then file stem)
    #[arg(long, env = "SLEEP_PE_PATIENT_ID")]
    patient_id: Option<String>,
    /// Output directory
    #[arg(long, env = "SLEEP_PE_OUT", default_value = ".")]
    out: PathBuf,
    /// What to write: report and/or csv
    #[arg(
        long,
        env = "SLEEP_PE_FORMAT",
        value_enum,
        value_delimiter = ',',
        default_values = ["report", "csv"]
    )]
    format: Vec<OutputFormat>,
}

#[derive(clap::Args)]
struct PeArgs {
    /// Numeric series: whitespace- or comma-separated values ("-" for stdin)
    input: PathBuf,
    /// Pattern order m
    #[arg(long, env = "SLEEP_PE_ORDER", default_value_t = 3)]
    order: usize,
    /// Time delay tau
    #[arg(long, env = "SLEEP_PE_DELAY", default_value_t = 1)]
    delay: usize,
    /// How equal values inside a tuple are ranked
    #[arg(
        long,
        env = "SLEEP_PE_TIE_RULE",
        value_enum,
        default_value = "stable-rank"
    )]
    tie_rule: TieRuleArg,
    /// Seed for the noise tie rule
    #[arg(long, env = "SLEEP_PE_TIE_SEED", default_value_t = 0)]
    tie_seed: u64,
}

#[derive(clap::Args)]
struct SynthArgs {
    /// Signal shape
    #[arg(long, value_enum)]
    kind: SynthKind,
    /// Number of samples
    #[arg(short = 'n', long = "count")]
    count: usize,
    /// Sine frequency in Hz
    #[arg(long, default_value_t = 10.0)]
    freq: f64,
    /// Sample rate in Hz (time base for sine)
    #[arg(long, env = "SLEEP_PE_RATE", default_value_t = 200)]
    rate: u64,
    /// Noise seed
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output file (stdout when omitted)
    #[arg(long, env = "SLEEP_PE_OUT")]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct BoxplotArgs {
    /// Analysis report (JSON) produced by `analyze`
    report: PathBuf,
    /// Output directory
    #[arg(long, env = "SLEEP_PE_OUT", default_value = ".")]
    out: PathBuf,
    /// What to write: svg and/or csv
    #[arg(
        long,
        env = "SLEEP_PE_FORMAT",
        value_enum,
        value_delimiter = ',',
        default_values = ["svg", "csv"]
    )]
    format: Vec<OutputFormat>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze(args) => analyze::run(args),
        Command::Pe(args) => pe::run(args),
        Command::Synth(args) => synth::run(args),
        Command::Boxplot(args) => boxplot::run(args),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error[{}]: {}", e.category.as_str(), e.message);
        std::process::exit(e.category.exit_code());
    }
}
