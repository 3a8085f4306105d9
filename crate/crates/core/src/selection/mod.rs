//! Feature selection: mutual-information ranking, Q-percent subsets,
//! per-feature standardization and PCA.

mod mi;
mod pca;

pub use mi::{equal_frequency_bins, mutual_information, q_subset, rank_features, rank_rows, MiRanking};
pub use pca::Pca;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Q values scanned by the wrapper search.
pub const DEFAULT_Q_GRID: [u32; 9] = [10, 15, 20, 25, 30, 35, 40, 45, 50];
pub const DEFAULT_BINS: usize = 10;
pub const DEFAULT_VARIANCE_FRACTION: f64 = 0.95;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SelectionError {
    #[error("{samples} samples but {labels} labels")]
    LengthMismatch { samples: usize, labels: usize },
    #[error("empty input")]
    Empty,
    #[error("bins must be >= 2, got {0}")]
    BadBins(usize),
    #[error("feature vectors do not share the same feature names")]
    InconsistentFeatures,
    #[error("dataset has a single label; feature ranking needs at least two")]
    SingleLabel,
    #[error("Q must be in 1..=100, got {0}")]
    BadQ(u32),
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("expected dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("variance fraction {0} outside (0, 1]")]
    BadVarianceFraction(f64),
}

/// Per-feature z-score parameters estimated on training data.
///
/// Zero-variance features keep a unit scale so they map to a constant 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self, SelectionError> {
        let first = rows.first().ok_or(SelectionError::Empty)?;
        let p = first.len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; p];
        for r in rows {
            if r.len() != p {
                return Err(SelectionError::DimensionMismatch {
                    expected: p,
                    found: r.len(),
                });
            }
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; p];
        for r in rows {
            for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let scale = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self { mean, scale })
    }

    /// Indices of features whose training variance was zero.
    pub fn constant_features(&self, rows: &[Vec<f64>]) -> Vec<usize> {
        (0..self.mean.len())
            .filter(|&j| rows.iter().all(|r| r[j] == rows[0][j]))
            .collect()
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>, SelectionError> {
        if v.len() != self.mean.len() {
            return Err(SelectionError::DimensionMismatch {
                expected: self.mean.len(),
                found: v.len(),
            });
        }
        Ok(v.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((x, m), s)| (x - m) / s)
            .collect())
    }
}

/// Column subset in ascending index order.
pub fn select_columns(v: &[f64], indices: &[usize]) -> Vec<f64> {
    indices.iter().map(|&i| v[i]).collect()
}

/// A fitted Q-subset plus its PCA reduction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionModel {
    pub q: u32,
    pub selected: Vec<usize>,
    pub pca: Pca,
}

impl SelectionModel {
    /// Builds the Q-subset of `ranking` and fits PCA on those columns of `rows`.
    pub fn fit(ranking: &MiRanking, q: u32, rows: &[Vec<f64>], variance_fraction: f64) -> Result<Self, SelectionError> {
        let selected = q_subset(ranking, q)?;
        let sub: Vec<Vec<f64>> = rows.iter().map(|r| select_columns(r, &selected)).collect();
        let pca = Pca::fit(&sub, variance_fraction)?;
        Ok(Self { q, selected, pca })
    }

    pub fn dim(&self) -> usize {
        self.pca.retained
    }

    /// Standardized full feature vector -> reduced vector.
    pub fn transform(&self, v: &[f64]) -> Result<Vec<f64>, SelectionError> {
        if let Some(&max) = self.selected.last() {
            if max >= v.len() {
                return Err(SelectionError::DimensionMismatch {
                    expected: max + 1,
                    found: v.len(),
                });
            }
        }
        self.pca.transform(&select_columns(v, &self.selected))
    }
}
