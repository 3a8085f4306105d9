//! Wrapper-style training: standardize, rank by mutual information, and for
//! every Q candidate fit a PCA and grid-search an SVM by cross-validation.
//! The Q with the best validation accuracy wins.

use serde::{Deserialize, Serialize};

use super::cv::grid_search;
use super::multiclass::{MulticlassSvmModel, Prediction};
use super::smo::SvmParams;
use super::PipelineError;
use crate::features::FeatureVector;
use crate::selection::{self, rank_rows, MiRanking, SelectionModel, Standardizer};
use crate::trace::FamilyLabel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub q_grid: Vec<u32>,
    pub bins: usize,
    pub variance_fraction: f64,
    pub c_grid: Vec<f64>,
    /// Gamma candidates are `2^j / d` for the reduced dimension `d`.
    pub gamma_exponents: Vec<i32>,
    pub folds: usize,
    pub seed: u64,
    pub kkt_tolerance: f64,
    pub max_passes: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            q_grid: selection::DEFAULT_Q_GRID.to_vec(),
            bins: selection::DEFAULT_BINS,
            variance_fraction: selection::DEFAULT_VARIANCE_FRACTION,
            c_grid: vec![0.1, 1.0, 10.0, 100.0],
            gamma_exponents: vec![-2, -1, 0, 1, 2],
            folds: 5,
            seed: 0,
            kkt_tolerance: 1e-3,
            max_passes: 10,
        }
    }
}

impl PipelineConfig {
    pub fn gamma_grid(&self, dim: usize) -> Vec<f64> {
        self.gamma_exponents
            .iter()
            .map(|&j| 2f64.powi(j) / dim as f64)
            .collect()
    }

    fn base_params(&self) -> SvmParams {
        SvmParams {
            kkt_tolerance: self.kkt_tolerance,
            max_passes: self.max_passes,
            ..SvmParams::default()
        }
    }
}

/// Outcome of one Q candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QCandidate {
    pub q: u32,
    pub features: usize,
    pub dim: usize,
    pub cv_accuracy: f64,
    pub c: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub seed: u64,
    pub q_grid: Vec<u32>,
    pub candidates: Vec<QCandidate>,
    pub chosen_q: u32,
    pub params: SvmParams,
    pub cv_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedPipeline {
    pub feature_names: Vec<String>,
    pub standardizer: Standardizer,
    pub ranking: MiRanking,
    pub selection: SelectionModel,
    pub svm: MulticlassSvmModel,
    pub metadata: TrainingMetadata,
}

impl TrainedPipeline {
    /// Full fingerprint -> reduced SVM input.
    pub fn reduce(&self, fv: &FeatureVector) -> Result<Vec<f64>, PipelineError> {
        if fv.names() != self.feature_names.as_slice() {
            return Err(PipelineError::FeatureMismatch {
                expected: self.feature_names.len(),
                found: fv.len(),
            });
        }
        let z = self.standardizer.apply(fv.values())?;
        Ok(self.selection.transform(&z)?)
    }

    pub fn classify(&self, fv: &FeatureVector) -> Result<Prediction, PipelineError> {
        let x = self.reduce(fv)?;
        Ok(self.svm.predict(&x)?)
    }

    pub fn classes(&self) -> &[FamilyLabel] {
        &self.svm.classes
    }
}

/// Trains the full pipeline on labeled fingerprints (each run is one instance).
pub fn train_pipeline(
    dataset: &[(FeatureVector, FamilyLabel)],
    config: &PipelineConfig,
) -> Result<TrainedPipeline, PipelineError> {
    let (first, _) = dataset.first().ok_or(PipelineError::Empty)?;
    let names = first.names().to_vec();
    if dataset.iter().any(|(fv, _)| fv.names() != names.as_slice()) {
        return Err(PipelineError::Selection(
            selection::SelectionError::InconsistentFeatures,
        ));
    }
    if config.q_grid.is_empty() {
        return Err(PipelineError::EmptyQGrid);
    }
    let labels: Vec<FamilyLabel> = dataset.iter().map(|(_, l)| l.clone()).collect();
    let families = labels.iter().collect::<std::collections::BTreeSet<_>>().len();
    if families < 2 {
        return Err(PipelineError::TooFewFamilies(families));
    }

    let raw: Vec<Vec<f64>> = dataset.iter().map(|(fv, _)| fv.values().to_vec()).collect();
    let standardizer = Standardizer::fit(&raw)?;
    if standardizer.constant_features(&raw).len() == names.len() {
        return Err(PipelineError::AllDegenerate);
    }
    let rows: Vec<Vec<f64>> = raw.iter().map(|r| standardizer.apply(r)).collect::<Result<_, _>>()?;
    let ranking = rank_rows(&names, &rows, &labels, config.bins)?;
    let base = config.base_params();

    let mut candidates = Vec::with_capacity(config.q_grid.len());
    let mut best: Option<(usize, SelectionModel)> = None;
    for &q in &config.q_grid {
        let sel = SelectionModel::fit(&ranking, q, &rows, config.variance_fraction)?;
        let reduced: Vec<Vec<f64>> = rows.iter().map(|r| sel.transform(r)).collect::<Result<_, _>>()?;
        let gammas = config.gamma_grid(sel.dim());
        let gs = grid_search(
            &reduced,
            &labels,
            &config.c_grid,
            &gammas,
            &base,
            config.folds,
            config.seed,
        )?;
        log::debug!(
            "Q={q}: {} features, d={}, cv={:.4}",
            sel.selected.len(),
            sel.dim(),
            gs.best_accuracy
        );
        candidates.push(QCandidate {
            q,
            features: sel.selected.len(),
            dim: sel.dim(),
            cv_accuracy: gs.best_accuracy,
            c: gs.best.c,
            gamma: gs.best.gamma,
        });
        let idx = candidates.len() - 1;
        let better = match &best {
            None => true,
            Some((b, bsel)) => {
                let (cur, prev) = (&candidates[idx], &candidates[*b]);
                cur.cv_accuracy > prev.cv_accuracy || (cur.cv_accuracy == prev.cv_accuracy && q < bsel.q)
            }
        };
        if better {
            best = Some((idx, sel));
        }
    }
    let (best_idx, selection) = best.expect("non-empty Q grid");
    let winner = candidates[best_idx].clone();
    let params = SvmParams {
        c: winner.c,
        gamma: winner.gamma,
        ..base
    };
    let reduced: Vec<Vec<f64>> = rows.iter().map(|r| selection.transform(r)).collect::<Result<_, _>>()?;
    let svm = MulticlassSvmModel::train(&reduced, &labels, &params)?;

    Ok(TrainedPipeline {
        feature_names: names,
        standardizer,
        ranking,
        selection,
        svm,
        metadata: TrainingMetadata {
            seed: config.seed,
            q_grid: config.q_grid.clone(),
            candidates,
            chosen_q: winner.q,
            params,
            cv_accuracy: winner.cv_accuracy,
        },
    })
}
