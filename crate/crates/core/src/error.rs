//! One error type for the whole crate.
//!
//! Variants map onto the process exit codes used by the command-line driver:
//! configuration and format problems, numeric divergence, and infeasible
//! transport masks are distinguishable so callers can exit accordingly.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Mismatched tensor shapes or out-of-range indices.
    #[error("shape error: {0}")]
    Shape(String),

    /// Invalid configuration value or violated precondition.
    #[error("config error: {0}")]
    Config(String),

    /// A NaN or infinity where a finite value is required.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// Structurally degenerate input (all-zero frame, empty dataset, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// The transport mask admits no perfect matching and fallback is off.
    /// `rows` lists row indices left unmatched by a maximum matching.
    #[error("infeasible transport mask: rows {rows:?} cannot be matched")]
    InfeasibleMask { rows: Vec<usize> },

    /// An iterative computation produced a non-finite state.
    #[error("numeric divergence at step {step}: {context}")]
    Divergence { step: usize, context: String },

    /// A gradient entry was NaN; names the offending parameter.
    #[error("NaN gradient in {0}")]
    NanGradient(String),

    /// Malformed on-disk artifact (tensor file, manifest, checkpoint).
    #[error("format error: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
