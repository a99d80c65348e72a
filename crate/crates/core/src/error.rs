//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by any stage of the pipeline.
///
/// Variants split into two broad families which the CLI maps to distinct
/// exit codes: configuration/input errors (exit 2) and numeric or domain
/// errors discovered during computation (exit 3).
#[derive(Debug, Error)]
pub enum Error {
    /// Octal polynomial string could not be parsed.
    #[error("invalid octal polynomial {text:?}: {reason}")]
    InvalidPolynomial { text: String, reason: String },

    /// Code specification string (e.g. `"(13,17)"`) is malformed.
    #[error("invalid code specification {0:?}: expected \"(g1,g2,...,gn)\" in octal")]
    InvalidCodeSpec(String),

    /// Generator polynomials violate a structural invariant.
    #[error("invalid generator set: {0}")]
    InvalidGenerators(String),

    /// Probability or other numeric argument outside its legal range.
    #[error("domain error: {0}")]
    Domain(String),

    /// Spectrum has no entries, so no summary or bound can be formed.
    #[error("spectrum is empty (all lengths truncated away?)")]
    EmptySpectrum,

    /// A bound was requested at a burst length absent from the spectrum.
    #[error("no spectrum entry at length j={0}")]
    MissingLength(u32),

    /// Received word cannot correspond to a zero-terminated codeword.
    #[error("malformed received word: {0}")]
    MalformedReceived(String),

    /// Simulation or CLI parameters are inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// The code embedded in an input file does not match the requested code.
    #[error("code mismatch: {expected} (requested) vs {found} (in file)")]
    CodeMismatch { expected: String, found: String },

    /// Report join failed because the two grids do not line up.
    #[error("grid mismatch: p values present in only one input: {0:?}")]
    GridMismatch(Vec<String>),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    /// Input file has an unexpected shape (missing column, bad number, ...).
    #[error("malformed input file {path}: {reason}")]
    MalformedFile { path: String, reason: String },
}

impl Error {
    /// Exit code for the CLI: 2 for configuration/input problems, 3 for
    /// numeric/domain failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_)
            | Error::EmptySpectrum
            | Error::MissingLength(_)
            | Error::MalformedReceived(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
