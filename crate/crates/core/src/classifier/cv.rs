use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::multiclass::MulticlassSvmModel;
use super::smo::SvmParams;
use super::SvmError;
use crate::trace::FamilyLabel;

/// Stratified fold index per sample.
///
/// Each class's members are shuffled with a seeded generator and dealt
/// round-robin; the deal position carries over between classes so fold
/// sizes stay within one of each other.
pub fn stratified_folds(labels: &[FamilyLabel], k: usize, seed: u64) -> Result<Vec<usize>, SvmError> {
    if k < 2 {
        return Err(SvmError::BadFolds {
            folds: k,
            samples: labels.len(),
        });
    }
    if labels.len() < k {
        return Err(SvmError::BadFolds {
            folds: k,
            samples: labels.len(),
        });
    }
    let mut by_class: BTreeMap<&FamilyLabel, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0; labels.len()];
    let mut next = 0;
    for (class, mut members) in by_class {
        if members.len() < k {
            log::debug!("class {class} has {} samples for {k} folds", members.len());
        }
        members.shuffle(&mut rng);
        for idx in members {
            folds[idx] = next % k;
            next += 1;
        }
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOutcome {
    pub mean_accuracy: f64,
    pub fold_accuracies: Vec<f64>,
}

/// Stratified k-fold cross-validation of the one-vs-one SVM.
pub fn cross_validate(
    inputs: &[Vec<f64>],
    labels: &[FamilyLabel],
    params: &SvmParams,
    k: usize,
    seed: u64,
) -> Result<CvOutcome, SvmError> {
    let folds = stratified_folds(labels, k, seed)?;
    let fold_accuracies = (0..k)
        .map(|f| {
            let mut train_x = Vec::new();
            let mut train_y = Vec::new();
            let mut test = Vec::new();
            for (i, &fi) in folds.iter().enumerate() {
                if fi == f {
                    test.push(i);
                } else {
                    train_x.push(inputs[i].clone());
                    train_y.push(labels[i].clone());
                }
            }
            let first = &train_y[0];
            let correct = if train_y.iter().all(|l| l == first) {
                // a single class left in training: it is the only possible answer
                test.iter().filter(|&&i| &labels[i] == first).count()
            } else {
                let model = MulticlassSvmModel::train(&train_x, &train_y, params)?;
                let mut correct = 0;
                for &i in &test {
                    if model.predict_label(&inputs[i])? == labels[i] {
                        correct += 1;
                    }
                }
                correct
            };
            Ok(correct as f64 / test.len() as f64)
        })
        .collect::<Result<Vec<f64>, SvmError>>()?;
    Ok(CvOutcome {
        mean_accuracy: fold_accuracies.iter().sum::<f64>() / k as f64,
        fold_accuracies,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub c: f64,
    pub gamma: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchOutcome {
    pub best: SvmParams,
    pub best_accuracy: f64,
    pub cells: Vec<GridCell>,
}

fn sorted_grid(grid: &[f64]) -> Vec<f64> {
    let mut g = grid.to_vec();
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

/// Exhaustive (C, gamma) search by cross-validated accuracy.
///
/// Ties resolve to the smaller C, then the smaller gamma. `base` supplies the
/// solver tolerance and pass limit.
pub fn grid_search(
    inputs: &[Vec<f64>],
    labels: &[FamilyLabel],
    c_grid: &[f64],
    gamma_grid: &[f64],
    base: &SvmParams,
    k: usize,
    seed: u64,
) -> Result<GridSearchOutcome, SvmError> {
    if c_grid.is_empty() || gamma_grid.is_empty() {
        return Err(SvmError::EmptyGrid);
    }
    let cs = sorted_grid(c_grid);
    let gammas = sorted_grid(gamma_grid);
    let combos: Vec<(f64, f64)> = cs.iter().flat_map(|&c| gammas.iter().map(move |&g| (c, g))).collect();
    let cells = combos
        .par_iter()
        .map(|&(c, gamma)| {
            let params = SvmParams { c, gamma, ..*base };
            let cv = cross_validate(inputs, labels, &params, k, seed)?;
            Ok(GridCell {
                c,
                gamma,
                accuracy: cv.mean_accuracy,
            })
        })
        .collect::<Result<Vec<_>, SvmError>>()?;
    let mut best = 0;
    for (i, cell) in cells.iter().enumerate() {
        if cell.accuracy > cells[best].accuracy {
            best = i;
        }
    }
    Ok(GridSearchOutcome {
        best: SvmParams {
            c: cells[best].c,
            gamma: cells[best].gamma,
            ..*base
        },
        best_accuracy: cells[best].accuracy,
        cells,
    })
}
