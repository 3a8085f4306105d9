//! RBF C-SVM trained by SMO, one-vs-one multiclass voting, stratified
//! cross-validation, grid search and the wrapper training pipeline.

mod cv;
mod multiclass;
mod pipeline;
mod smo;

pub use cv::{cross_validate, grid_search, stratified_folds, CvOutcome, GridCell, GridSearchOutcome};
pub use multiclass::{MulticlassSvmModel, PairModel, Prediction};
pub use pipeline::{train_pipeline, PipelineConfig, QCandidate, TrainedPipeline, TrainingMetadata};
pub use smo::{dual_objective, kernel_matrix, solve_dual, train_binary, BinarySvmModel, DualSolution, SvmParams};

use thiserror::Error;

use crate::selection::SelectionError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SvmError {
    #[error("expected dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("training data contains a single class")]
    SingleClass,
    #[error("targets must be +1 or -1, got {0}")]
    BadTarget(f64),
    #[error("invalid SVM parameters {0:?}")]
    InvalidParams(SvmParams),
    #[error("cannot make {folds} folds from {samples} samples (need folds >= 2 and samples >= folds)")]
    BadFolds { folds: usize, samples: usize },
    #[error("empty hyperparameter grid")]
    EmptyGrid,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("empty training set")]
    Empty,
    #[error("need at least 2 families, got {0}")]
    TooFewFamilies(usize),
    #[error("empty Q grid")]
    EmptyQGrid,
    #[error("every feature column is constant")]
    AllDegenerate,
    #[error("fingerprint has {found} features that do not match the model's {expected}")]
    FeatureMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error(transparent)]
    Svm(#[from] SvmError),
}

/// `exp(-gamma * |u - v|^2)`.
pub fn rbf_kernel(u: &[f64], v: &[f64], gamma: f64) -> Result<f64, SvmError> {
    if u.len() != v.len() {
        return Err(SvmError::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    Ok((-gamma * sq_dist(u, v)).exp())
}

pub(crate) fn sq_dist(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum()
}
