//! Error type shared across the crate.

use std::path::PathBuf;

/// Result alias used throughout the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of a mathematical function.
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    /// An integrand produced a non-finite value at a quadrature node.
    #[error("integrand is not finite at node {node} (x = {x})")]
    Evaluation { node: usize, x: f64 },

    /// Mismatched vector lengths.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// Index outside the valid range.
    #[error("index {index} out of range for {len} pairs")]
    Index { index: usize, len: usize },

    /// Two nodes share a position, so some pathloss is undefined.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// A zero-norm channel vector reached a relay baseline.
    #[error("degenerate channel: {0}")]
    DegenerateChannel(&'static str),

    /// A caller violated a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A parameter failed validation.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    /// The configuration document could not be parsed.
    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
