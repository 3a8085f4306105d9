//! Confusion matrices, the repeated holdout experiment and DFA stability reports.

mod confusion;
mod holdout;
mod stability;

pub use confusion::ConfusionMatrix;
pub use holdout::{
    repeated_holdout, stratified_split, summarize, ClassSummary, ExperimentReport, HoldoutConfig, RepetitionResult,
    SampleRuns,
};
pub use stability::{dfa_length_sweep, dfa_stability_report, sweep_csv, StabilityReport, SweepRow};

use thiserror::Error;

use crate::classifier::PipelineError;
use crate::features::DfaError;
use crate::synth::SynthError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{truths} truths but {predictions} predictions")]
    LengthMismatch { truths: usize, predictions: usize },
    #[error("label {0:?} is not in the class list")]
    UnknownLabel(String),
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("family {family} has {samples} sample(s); need at least 2")]
    FamilyTooSmall { family: String, samples: usize },
    #[error("need at least 2 families, got {0}")]
    TooFewFamilies(usize),
    #[error("sample {0} has no runs")]
    NoRuns(String),
    #[error("repetitions must be positive")]
    NoRepetitions,
    #[error("train fraction {0} outside (0, 1)")]
    BadTrainFraction(f64),
    #[error("need at least 2 runs, got {0}")]
    TooFewRuns(usize),
    #[error("lengths must be strictly ascending and at least 256")]
    BadLengths,
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Dfa(#[from] DfaError),
}
