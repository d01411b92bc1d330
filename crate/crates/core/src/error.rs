//! Error taxonomy shared by every module in the crate.
//!
//! Variants are deliberately specific so that callers (and the CLI exit-code
//! mapping) can distinguish bad arguments from bad files from a diverging
//! training run without string-matching messages.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument or configuration value violates a documented precondition
    /// (empty collocation set, malformed architecture, non-positive step
    /// size, out-of-range index, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A parameter container is internally inconsistent or does not match
    /// its peer, reported against the offending layer.
    #[error("shape mismatch at layer {layer}: {detail}")]
    Shape { layer: usize, detail: String },

    /// A value that must be finite is NaN or infinite.
    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    /// The training loss left the representable range; the epoch identifies
    /// where the run was aborted.
    #[error("training diverged at epoch {epoch}: total loss is {value}")]
    Diverged { epoch: usize, value: f64 },

    /// A checkpoint declares a format revision this build does not read.
    #[error("unsupported format_version {found}, expected {expected}")]
    FormatVersion { found: u32, expected: u32 },

    /// A file parsed as text/JSON but its contents violate the documented
    /// schema; `detail` names the offending field, layer, or line.
    #[error("malformed {kind} file: {detail}")]
    Malformed { kind: &'static str, detail: String },

    /// An operating-system I/O failure, annotated with the path involved.
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// JSON (de)serialization failure.
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Convenience constructor for [`Error::Io`].
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
