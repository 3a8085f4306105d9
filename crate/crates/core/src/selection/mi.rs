use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::SelectionError;
use crate::features::FeatureVector;
use crate::trace::FamilyLabel;

/// Equal-frequency bin index per sample.
///
/// A value is placed by the sorted rank of its first occurrence, so equal
/// values always share a bin and a constant feature collapses to bin 0.
pub fn equal_frequency_bins(samples: &[f64], bins: usize) -> Vec<usize> {
    let n = samples.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| samples[a].total_cmp(&samples[b]));
    let mut out = vec![0; n];
    let mut first_rank = 0;
    for (rank, &idx) in order.iter().enumerate() {
        if rank > 0 && samples[idx] != samples[order[rank - 1]] {
            first_rank = rank;
        }
        out[idx] = first_rank * bins / n;
    }
    out
}

/// Plug-in mutual information `I(F; L)` in nats over `bins` equal-frequency bins.
pub fn mutual_information(samples: &[f64], labels: &[FamilyLabel], bins: usize) -> Result<f64, SelectionError> {
    if samples.len() != labels.len() {
        return Err(SelectionError::LengthMismatch {
            samples: samples.len(),
            labels: labels.len(),
        });
    }
    if samples.is_empty() {
        return Err(SelectionError::Empty);
    }
    if bins < 2 {
        return Err(SelectionError::BadBins(bins));
    }
    let class_index: BTreeMap<&FamilyLabel, usize> = labels
        .iter()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .zip(0..)
        .collect();
    let k = class_index.len();
    let binned = equal_frequency_bins(samples, bins);

    let mut joint = vec![0usize; bins * k];
    let mut bin_count = vec![0usize; bins];
    let mut class_count = vec![0usize; k];
    for (b, label) in binned.iter().zip(labels) {
        let c = class_index[label];
        joint[b * k + c] += 1;
        bin_count[*b] += 1;
        class_count[c] += 1;
    }

    let n = samples.len() as f64;
    let mut mi = 0.0;
    for b in 0..bins {
        for c in 0..k {
            let count = joint[b * k + c];
            if count == 0 {
                continue;
            }
            let count = count as f64;
            mi += count / n * ((count * n) / (bin_count[b] as f64 * class_count[c] as f64)).ln();
        }
    }
    Ok(mi.max(0.0))
}

/// Mutual information per feature, aligned to canonical feature order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiRanking {
    pub names: Vec<String>,
    pub mi: Vec<f64>,
    pub max_mi: f64,
}

impl MiRanking {
    pub fn from_values(names: Vec<String>, mi: Vec<f64>) -> Self {
        let max_mi = mi.iter().copied().fold(0.0, f64::max);
        Self { names, mi, max_mi }
    }

    /// Indices sorted by decreasing MI (ties by index).
    pub fn order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.mi.len()).collect();
        idx.sort_by(|&a, &b| self.mi[b].total_cmp(&self.mi[a]).then(a.cmp(&b)));
        idx
    }
}

/// Ranks every feature column by its mutual information with the labels.
pub fn rank_features(dataset: &[(FeatureVector, FamilyLabel)], bins: usize) -> Result<MiRanking, SelectionError> {
    let (first, _) = dataset.first().ok_or(SelectionError::Empty)?;
    if dataset.iter().any(|(fv, _)| fv.names() != first.names()) {
        return Err(SelectionError::InconsistentFeatures);
    }
    let rows: Vec<Vec<f64>> = dataset.iter().map(|(fv, _)| fv.values().to_vec()).collect();
    let labels: Vec<FamilyLabel> = dataset.iter().map(|(_, l)| l.clone()).collect();
    rank_rows(first.names(), &rows, &labels, bins)
}

/// [`rank_features`] on a plain samples x features matrix.
pub fn rank_rows(
    names: &[String],
    rows: &[Vec<f64>],
    labels: &[FamilyLabel],
    bins: usize,
) -> Result<MiRanking, SelectionError> {
    if rows.len() != labels.len() {
        return Err(SelectionError::LengthMismatch {
            samples: rows.len(),
            labels: labels.len(),
        });
    }
    if rows.iter().any(|r| r.len() != names.len()) {
        return Err(SelectionError::InconsistentFeatures);
    }
    let distinct = labels.iter().collect::<std::collections::BTreeSet<_>>().len();
    if distinct < 2 {
        return Err(SelectionError::SingleLabel);
    }
    let mut column = vec![0.0; rows.len()];
    let mi = (0..names.len())
        .map(|j| {
            for (slot, r) in column.iter_mut().zip(rows) {
                *slot = r[j];
            }
            mutual_information(&column, labels, bins)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MiRanking::from_values(names.to_vec(), mi))
}

/// `{ i : MI_i >= (1 - q/100) * max_mi }`, ascending.
pub fn q_subset(ranking: &MiRanking, q: u32) -> Result<Vec<usize>, SelectionError> {
    if q == 0 || q > 100 {
        return Err(SelectionError::BadQ(q));
    }
    let threshold = f64::from(100 - q) / 100.0 * ranking.max_mi;
    Ok(ranking
        .mi
        .iter()
        .enumerate()
        .filter(|(_, &m)| m >= threshold)
        .map(|(i, _)| i)
        .collect())
}
