//! Repeated stratified holdout: split samples per family, train the
//! pipeline on the training runs, classify every test run.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::confusion::ConfusionMatrix;
use super::EvalError;
use crate::classifier::{train_pipeline, PipelineConfig};
use crate::features::FeatureVector;
use crate::stats::{mean, std_dev};
use crate::trace::FamilyLabel;

/// One sample: all fingerprints of its execution runs share a side of every split.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRuns {
    pub id: String,
    pub family: FamilyLabel,
    pub runs: Vec<FeatureVector>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldoutConfig {
    pub repetitions: usize,
    pub train_fraction: f64,
    pub seed: u64,
    pub pipeline: PipelineConfig,
}

impl Default for HoldoutConfig {
    fn default() -> Self {
        Self {
            repetitions: 20,
            train_fraction: 0.7,
            seed: 0,
            pipeline: PipelineConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub class: FamilyLabel,
    pub precision_mean: f64,
    pub precision_std: f64,
    /// Repetitions where the class was never predicted (precision undefined).
    pub precision_excluded: usize,
    pub recall_mean: f64,
    pub recall_std: f64,
    pub recall_excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionResult {
    pub repetition: usize,
    pub accuracy: f64,
    pub chosen_q: u32,
    pub train_samples: usize,
    pub test_samples: usize,
    pub confusion: ConfusionMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub classes: Vec<FamilyLabel>,
    pub repetitions: Vec<RepetitionResult>,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub per_class: Vec<ClassSummary>,
    /// Counts summed over repetitions.
    pub confusion: ConfusionMatrix,
    pub normalized_confusion: Vec<Vec<f64>>,
    pub zero_support_rows: Vec<usize>,
}

impl ExperimentReport {
    pub fn accuracies(&self) -> Vec<f64> {
        self.repetitions.iter().map(|r| r.accuracy).collect()
    }

    /// `class,precision_mean,precision_std,recall_mean,recall_std`
    pub fn precision_recall_csv(&self) -> String {
        let mut out = String::from("class,precision_mean,precision_std,recall_mean,recall_std\n");
        for c in &self.per_class {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                c.class, c.precision_mean, c.precision_std, c.recall_mean, c.recall_std
            ));
        }
        out
    }

    /// Row-major normalized confusion matrix with a class header.
    pub fn confusion_csv(&self) -> String {
        let mut out = String::from("class");
        for c in &self.classes {
            out.push(',');
            out.push_str(c.as_str());
        }
        out.push('\n');
        for (c, row) in self.classes.iter().zip(&self.normalized_confusion) {
            out.push_str(c.as_str());
            for v in row {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }

    /// `repetition,accuracy,chosen_q`
    pub fn repetitions_csv(&self) -> String {
        let mut out = String::from("repetition,accuracy,chosen_q\n");
        for r in &self.repetitions {
            out.push_str(&format!("{},{},{}\n", r.repetition, r.accuracy, r.chosen_q));
        }
        out
    }
}

/// Splits sample indices per family; every family keeps at least one sample
/// on each side.
pub fn stratified_split(samples: &[SampleRuns], train_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut by_family: BTreeMap<&FamilyLabel, Vec<usize>> = BTreeMap::new();
    for (i, s) in samples.iter().enumerate() {
        by_family.entry(&s.family).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (_, mut members) in by_family {
        members.shuffle(&mut rng);
        let n = members.len();
        let n_train = ((train_fraction * n as f64).round() as usize).clamp(1, n.saturating_sub(1).max(1));
        train.extend_from_slice(&members[..n_train]);
        test.extend_from_slice(&members[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

fn repetition_seed(seed: u64, rep: usize) -> u64 {
    seed.wrapping_add((rep as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

pub fn repeated_holdout(samples: &[SampleRuns], config: &HoldoutConfig) -> Result<ExperimentReport, EvalError> {
    if config.repetitions == 0 {
        return Err(EvalError::NoRepetitions);
    }
    if !(config.train_fraction > 0.0 && config.train_fraction < 1.0) {
        return Err(EvalError::BadTrainFraction(config.train_fraction));
    }
    let mut family_sizes: BTreeMap<&FamilyLabel, usize> = BTreeMap::new();
    for s in samples {
        *family_sizes.entry(&s.family).or_default() += 1;
        if s.runs.is_empty() {
            return Err(EvalError::NoRuns(s.id.clone()));
        }
    }
    if let Some((f, n)) = family_sizes.iter().find(|(_, &n)| n < 2) {
        return Err(EvalError::FamilyTooSmall {
            family: f.to_string(),
            samples: *n,
        });
    }
    if family_sizes.len() < 2 {
        return Err(EvalError::TooFewFamilies(family_sizes.len()));
    }
    let classes: Vec<FamilyLabel> = family_sizes.keys().map(|f| (*f).clone()).collect();

    let repetitions = (0..config.repetitions)
        .into_par_iter()
        .map(|rep| {
            let seed = repetition_seed(config.seed, rep);
            let (train_idx, test_idx) = stratified_split(samples, config.train_fraction, seed);
            let train: Vec<(FeatureVector, FamilyLabel)> = train_idx
                .iter()
                .flat_map(|&i| {
                    samples[i]
                        .runs
                        .iter()
                        .map(move |fv| (fv.clone(), samples[i].family.clone()))
                })
                .collect();
            let pipeline_config = PipelineConfig {
                seed,
                ..config.pipeline.clone()
            };
            let model = train_pipeline(&train, &pipeline_config)?;
            let mut truths = Vec::new();
            let mut predictions = Vec::new();
            for &i in &test_idx {
                for fv in &samples[i].runs {
                    truths.push(samples[i].family.clone());
                    predictions.push(model.classify(fv)?.label);
                }
            }
            let confusion = ConfusionMatrix::from_predictions(&truths, &predictions, &classes)?;
            Ok(RepetitionResult {
                repetition: rep,
                accuracy: confusion.accuracy()?,
                chosen_q: model.metadata.chosen_q,
                train_samples: train_idx.len(),
                test_samples: test_idx.len(),
                confusion,
            })
        })
        .collect::<Result<Vec<_>, EvalError>>()?;

    Ok(summarize(classes, repetitions))
}

/// Aggregates per-repetition results in repetition order.
pub fn summarize(classes: Vec<FamilyLabel>, repetitions: Vec<RepetitionResult>) -> ExperimentReport {
    let accuracies: Vec<f64> = repetitions.iter().map(|r| r.accuracy).collect();
    let per_class = (0..classes.len())
        .map(|i| {
            let precisions: Vec<f64> = repetitions.iter().filter_map(|r| r.confusion.precision(i)).collect();
            let recalls: Vec<f64> = repetitions.iter().filter_map(|r| r.confusion.recall(i)).collect();
            ClassSummary {
                class: classes[i].clone(),
                precision_mean: mean(&precisions),
                precision_std: std_dev(&precisions),
                precision_excluded: repetitions.len() - precisions.len(),
                recall_mean: mean(&recalls),
                recall_std: std_dev(&recalls),
                recall_excluded: repetitions.len() - recalls.len(),
            }
        })
        .collect();
    let mut confusion = ConfusionMatrix::empty(classes.clone());
    for r in &repetitions {
        confusion.add(&r.confusion);
    }
    let (normalized_confusion, zero_support_rows) = confusion.normalize_rows();
    ExperimentReport {
        classes,
        mean_accuracy: mean(&accuracies),
        std_accuracy: std_dev(&accuracies),
        repetitions,
        per_class,
        confusion,
        normalized_confusion,
        zero_support_rows,
    }
}
