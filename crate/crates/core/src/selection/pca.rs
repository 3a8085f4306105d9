use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::SelectionError;

/// Tolerance on the cumulative explained-variance comparison, so that a
/// requested fraction of exactly 1.0 is reachable despite round-off.
const CUMULATIVE_SLACK: f64 = 1e-12;

/// Fitted principal component analysis.
///
/// `components` holds every eigenvector of the covariance matrix as a row,
/// sorted by decreasing eigenvalue; only the first `retained` are used by
/// [`Pca::transform`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pca {
    pub mean: Vec<f64>,
    pub components: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub explained: Vec<f64>,
    pub retained: usize,
    /// Set when the data has no variance at all.
    pub degenerate: bool,
}

impl Pca {
    /// Fits on `rows` (samples x features), keeping the smallest number of
    /// components whose cumulative explained variance reaches `variance_fraction`.
    pub fn fit(rows: &[Vec<f64>], variance_fraction: f64) -> Result<Self, SelectionError> {
        if rows.len() < 2 {
            return Err(SelectionError::TooFewSamples(rows.len()));
        }
        let p = rows[0].len();
        if p == 0 {
            return Err(SelectionError::Empty);
        }
        if rows.iter().any(|r| r.len() != p) {
            return Err(SelectionError::DimensionMismatch {
                expected: p,
                found: rows.iter().map(Vec::len).find(|&l| l != p).unwrap_or(0),
            });
        }
        if !(variance_fraction > 0.0 && variance_fraction <= 1.0) {
            return Err(SelectionError::BadVarianceFraction(variance_fraction));
        }

        let n = rows.len() as f64;
        let mut mean = vec![0.0; p];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        for m in mean.iter_mut() {
            *m /= n;
        }
        let mut cov = DMatrix::<f64>::zeros(p, p);
        for r in rows {
            let centered: Vec<f64> = r.iter().zip(&mean).map(|(v, m)| v - m).collect();
            for i in 0..p {
                let ci = centered[i];
                if ci == 0.0 {
                    continue;
                }
                for j in i..p {
                    cov[(i, j)] += ci * centered[j];
                }
            }
        }
        for i in 0..p {
            for j in i..p {
                let v = cov[(i, j)] / (n - 1.0);
                cov[(i, j)] = v;
                cov[(j, i)] = v;
            }
        }

        let eig = SymmetricEigen::new(cov);
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

        let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k].max(0.0)).collect();
        let components: Vec<Vec<f64>> = order
            .iter()
            .map(|&k| {
                let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
                let lead = v
                    .iter()
                    .enumerate()
                    .fold(0, |best, (i, x)| if x.abs() > v[best].abs() { i } else { best });
                if v[lead] < 0.0 {
                    v.iter_mut().for_each(|x| *x = -*x);
                }
                v
            })
            .collect();

        let total: f64 = eigenvalues.iter().sum();
        let degenerate = total <= 0.0;
        let explained: Vec<f64> = if degenerate {
            vec![0.0; p]
        } else {
            eigenvalues.iter().map(|l| l / total).collect()
        };
        let retained = if degenerate {
            1
        } else {
            let mut cum = 0.0;
            let mut d = p;
            for (k, e) in explained.iter().enumerate() {
                cum += e;
                if cum >= variance_fraction - CUMULATIVE_SLACK {
                    d = k + 1;
                    break;
                }
            }
            d
        };

        Ok(Self {
            mean,
            components,
            eigenvalues,
            explained,
            retained,
            degenerate,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, v: &[f64]) -> Result<Vec<f64>, SelectionError> {
        self.project(v, self.retained)
    }

    /// Projection onto the first `d` components.
    pub fn project(&self, v: &[f64], d: usize) -> Result<Vec<f64>, SelectionError> {
        if v.len() != self.input_dim() {
            return Err(SelectionError::DimensionMismatch {
                expected: self.input_dim(),
                found: v.len(),
            });
        }
        if self.degenerate {
            return Ok(vec![0.0; d]);
        }
        let centered: Vec<f64> = v.iter().zip(&self.mean).map(|(x, m)| x - m).collect();
        Ok(self.components[..d]
            .iter()
            .map(|c| c.iter().zip(&centered).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Maps a score vector back to input space.
    pub fn reconstruct(&self, scores: &[f64]) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (c, s) in self.components.iter().zip(scores) {
            for (o, x) in out.iter_mut().zip(c) {
                *o += s * x;
            }
        }
        out
    }
}
