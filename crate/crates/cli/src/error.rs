use std::path::PathBuf;

use entangle_core::tomography::MeasurementSetting;
use thiserror::Error;

/// Process exit status when the analysis ran to completion.
pub const EXIT_OK: i32 = 0;
/// Unreadable, malformed or unphysical input.
pub const EXIT_INPUT: i32 = 1;
/// The PPT test and the closed-form condition disagreed, or a numerical
/// routine failed.
pub const EXIT_INTERNAL: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON: {0}")]
    MalformedJson(String),

    #[error("wrong shape: {0}")]
    WrongShape(String),

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("malformed CSV: {0}")]
    MalformedCsv(String),

    #[error("line {line}: unknown polarization label {label:?}")]
    UnknownLabel { line: u64, label: String },

    #[error("line {line}: negative count {value}")]
    NegativeCount { line: u64, value: String },

    #[error("line {line}: duplicate setting {setting}")]
    DuplicateSetting {
        line: u64,
        setting: MeasurementSetting,
    },

    #[error("invalid input: {0}")]
    Invalid(#[from] entangle_core::Error),

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::InternalInconsistency(_)
            | Self::Invalid(entangle_core::Error::NumericalFailure(_)) => EXIT_INTERNAL,
            _ => EXIT_INPUT,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
