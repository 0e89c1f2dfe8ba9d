//! Error categories with stable exit codes and single-line messages.

use sleep_pe::analysis::AnalysisError;
use sleep_pe::dsp::DspError;
use sleep_pe::edf::EdfError;
use sleep_pe::hypnogram::HypnogramError;
use sleep_pe::OrdinalError;

/// What went wrong, at the granularity scripts branch on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    /// Missing or unreadable/unwritable files
    File,
    /// Input that parses wrong: EDF structure, annotations, reports, numbers
    Format,
    /// Requested channel absent or ambiguous
    Channel,
    /// Invalid or incompatible parameters
    Param,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::File => "file",
            Category::Format => "format",
            Category::Channel => "channel",
            Category::Param => "param",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Category::File => 10,
            Category::Format => 11,
            Category::Channel => 12,
            Category::Param => 13,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub category: Category,
    pub message: String,
}

impl CliError {
    pub fn file(message: impl Into<String>) -> Self {
        Self {
            category: Category::File,
            message: message.into(),
        }
    }

    pub fn format(message: impl Into<String>) -> Self {
        Self {
            category: Category::Format,
            message: message.into(),
        }
    }

    pub fn channel(message: impl Into<String>) -> Self {
        Self {
            category: Category::Channel,
            message: message.into(),
        }
    }

    pub fn param(message: impl Into<String>) -> Self {
        Self {
            category: Category::Param,
            message: message.into(),
        }
    }
}

impl From<EdfError> for CliError {
    fn from(e: EdfError) -> Self {
        let category = match &e {
            EdfError::Io(_) => Category::File,
            EdfError::UnknownChannel(_) | EdfError::AmbiguousChannel(_) => Category::Channel,
            _ => Category::Format,
        };
        Self {
            category,
            message: e.to_string(),
        }
    }
}

impl From<HypnogramError> for CliError {
    fn from(e: HypnogramError) -> Self {
        Self::format(e.to_string())
    }
}

impl From<OrdinalError> for CliError {
    fn from(e: OrdinalError) -> Self {
        Self::param(e.to_string())
    }
}

impl From<DspError> for CliError {
    fn from(e: DspError) -> Self {
        Self::param(e.to_string())
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        Self::param(e.to_string())
    }
}
