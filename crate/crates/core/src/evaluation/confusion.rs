use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::trace::FamilyLabel;

/// `counts[i][j]`: samples of true class `i` predicted as class `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<FamilyLabel>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn empty(classes: Vec<FamilyLabel>) -> Self {
        let k = classes.len();
        Self {
            classes,
            counts: vec![vec![0; k]; k],
        }
    }

    pub fn from_predictions(
        truths: &[FamilyLabel],
        predictions: &[FamilyLabel],
        classes: &[FamilyLabel],
    ) -> Result<Self, EvalError> {
        if truths.len() != predictions.len() {
            return Err(EvalError::LengthMismatch {
                truths: truths.len(),
                predictions: predictions.len(),
            });
        }
        let mut m = Self::empty(classes.to_vec());
        let index = |l: &FamilyLabel| {
            classes
                .iter()
                .position(|c| c == l)
                .ok_or_else(|| EvalError::UnknownLabel(l.to_string()))
        };
        for (t, p) in truths.iter().zip(predictions) {
            m.counts[index(t)?][index(p)?] += 1;
        }
        Ok(m)
    }

    pub fn k(&self) -> usize {
        self.classes.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        for (row, orow) in self.counts.iter_mut().zip(&other.counts) {
            for (c, o) in row.iter_mut().zip(orow) {
                *c += o;
            }
        }
    }

    pub fn accuracy(&self) -> Result<f64, EvalError> {
        let total = self.total();
        if total == 0 {
            return Err(EvalError::EmptyMatrix);
        }
        let diag: u64 = (0..self.k()).map(|i| self.counts[i][i]).sum();
        Ok(diag as f64 / total as f64)
    }

    /// `None` when class `i` was never predicted.
    pub fn precision(&self, i: usize) -> Option<f64> {
        let col: u64 = self.counts.iter().map(|r| r[i]).sum();
        (col > 0).then(|| self.counts[i][i] as f64 / col as f64)
    }

    /// `None` when class `i` has no samples.
    pub fn recall(&self, i: usize) -> Option<f64> {
        let row: u64 = self.counts[i].iter().sum();
        (row > 0).then(|| self.counts[i][i] as f64 / row as f64)
    }

    /// Row-stochastic matrix plus the indices of all-zero rows (left at zero).
    pub fn normalize_rows(&self) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut zero_rows = Vec::new();
        let rows = self
            .counts
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let sum: u64 = row.iter().sum();
                if sum == 0 {
                    zero_rows.push(i);
                    vec![0.0; row.len()]
                } else {
                    row.iter().map(|&c| c as f64 / sum as f64).collect()
                }
            })
            .collect();
        (rows, zero_rows)
    }
}
