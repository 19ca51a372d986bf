//! Crate-wide error type.
//!
//! Every fallible operation in this crate returns [`Error`]. Variants are
//! grouped by the pipeline stage that raises them; the payloads carry enough
//! context to act on the failure without re-running the stage.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
#[non_exhaustive]
pub enum Error {
    /// A parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Scene or pipeline configuration is inconsistent (e.g. target range
    /// outside the simulated range window).
    #[error("configuration error: {0}")]
    Config(String),

    /// Target localization on an all-zero image.
    #[error("no target: image has zero total power")]
    NoTarget,

    /// Phase extraction hit zero-magnitude samples; the indices are listed so
    /// the offending slow-time samples can be inspected.
    #[error("undefined phase at {} zero-magnitude sample(s), first indices {:?}", .indices.len(), preview(.indices))]
    UndefinedPhase { indices: Vec<usize> },

    /// Input series is too short for spectral analysis.
    #[error("input too short: got {got} samples, need at least {need}")]
    TooShort { got: usize, need: usize },

    /// No spectral peak in the search band (flat spectrum).
    #[error("no peak: spectrum is flat in the search band")]
    NoPeak,

    /// |D(f0)| = 0, so harmonic ratios are undefined.
    #[error("degenerate fundamental: |D(f0)| = 0")]
    DegenerateFundamental,

    /// Classifier training data contains a single class.
    #[error("degenerate labels: all samples are {0}")]
    DegenerateLabels(String),

    /// A hierarchical fit has an empty class partition.
    #[error("degenerate partition: {0} is empty")]
    DegeneratePartition(String),

    /// Unregularized normal equations are singular.
    #[error("rank deficient: normal equations are singular with gamma = 0")]
    RankDeficient,

    /// ROC/AUC is undefined with one class.
    #[error("undefined AUC: need both classes, got only {0}")]
    UndefinedAuc(String),

    /// Correlation coefficient undefined with zero variance.
    #[error("undefined correlation: {0} has zero variance")]
    UndefinedCc(String),

    /// Cross-validation cannot be built (too few samples per stratum).
    #[error("partition error: {0}")]
    Partition(String),

    /// A binary container failed to parse.
    #[error("format error in {path}: {reason}")]
    Format { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn preview(indices: &[usize]) -> Vec<usize> {
    indices.iter().copied().take(8).collect()
}
