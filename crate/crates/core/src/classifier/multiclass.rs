use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::smo::{train_binary, BinarySvmModel, SvmParams};
use super::SvmError;
use crate::trace::FamilyLabel;

/// Binary model for classes `positive` (target `+1`) vs `negative`,
/// indexing into the ensemble's class list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairModel {
    pub positive: usize,
    pub negative: usize,
    pub model: BinarySvmModel,
}

/// One-vs-one ensemble over a sorted class list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MulticlassSvmModel {
    pub classes: Vec<FamilyLabel>,
    pub pairs: Vec<PairModel>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: FamilyLabel,
    pub votes: Vec<usize>,
    /// Summed `|decision value|` of the pairwise contests each class won.
    pub margins: Vec<f64>,
}

impl MulticlassSvmModel {
    pub fn train(inputs: &[Vec<f64>], labels: &[FamilyLabel], params: &SvmParams) -> Result<Self, SvmError> {
        if inputs.len() != labels.len() {
            return Err(SvmError::DimensionMismatch {
                expected: inputs.len(),
                found: labels.len(),
            });
        }
        let classes: Vec<FamilyLabel> = labels.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        if classes.len() < 2 {
            return Err(SvmError::SingleClass);
        }
        let class_of: Vec<usize> = labels
            .iter()
            .map(|l| classes.binary_search(l).expect("label in class list"))
            .collect();

        let mut pairs = Vec::with_capacity(classes.len() * (classes.len() - 1) / 2);
        for a in 0..classes.len() {
            for b in a + 1..classes.len() {
                let mut xs = Vec::new();
                let mut ys = Vec::new();
                for (x, &c) in inputs.iter().zip(&class_of) {
                    if c == a {
                        xs.push(x.clone());
                        ys.push(1.0);
                    } else if c == b {
                        xs.push(x.clone());
                        ys.push(-1.0);
                    }
                }
                pairs.push(PairModel {
                    positive: a,
                    negative: b,
                    model: train_binary(&xs, &ys, params)?,
                });
            }
        }
        Ok(Self { classes, pairs })
    }

    pub fn dim(&self) -> usize {
        self.pairs.first().map_or(0, |p| p.model.dim())
    }

    /// Majority vote; ties go to the larger margin sum, then the earlier class.
    pub fn predict(&self, input: &[f64]) -> Result<Prediction, SvmError> {
        let k = self.classes.len();
        let mut votes = vec![0usize; k];
        let mut margins = vec![0.0; k];
        for pair in &self.pairs {
            let d = pair.model.decision_value(input)?;
            let winner = if d >= 0.0 { pair.positive } else { pair.negative };
            votes[winner] += 1;
            margins[winner] += d.abs();
        }
        let mut best = 0;
        for c in 1..k {
            if votes[c] > votes[best] || (votes[c] == votes[best] && margins[c] > margins[best]) {
                best = c;
            }
        }
        Ok(Prediction {
            label: self.classes[best].clone(),
            votes,
            margins,
        })
    }

    pub fn predict_label(&self, input: &[f64]) -> Result<FamilyLabel, SvmError> {
        Ok(self.predict(input)?.label)
    }
}
