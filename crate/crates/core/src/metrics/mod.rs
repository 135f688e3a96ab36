//! Evaluation suite: CLEAR-MOT accumulation and identity metrics,
//! orientation error metrics, and correlation analysis of camera-geometry
//! factors against localization/orientation errors.

mod correlation;
mod mot;
mod orientation;

pub use correlation::{
    factor_analysis, pearson_r, Correlation, FactorAnalysis, FactorCorrelation, FactorSample,
};
pub use mot::{MotAccumulator, MotEvent, MotSummary};
pub use orientation::{
    accuracy_at, angular_error, OrientationSummary, DEFAULT_ACCURACY_THRESHOLDS,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("duplicate id '{0}' within one frame")]
    DuplicateId(alloc::string::String),
    #[error("no frames accumulated")]
    EmptyAccumulator,
    #[error("no ground truth accumulated")]
    NoGroundTruth,
    #[error("empty input")]
    EmptyInput,
    #[error("zero variance in correlation input")]
    DegenerateVariance,
    #[error("input lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
}

/// Combined tracking and orientation evaluation for one slice of data.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub mot: MotSummary,
    /// Absent when no matched pair carried an orientation.
    pub orientation: Option<OrientationSummary>,
}
