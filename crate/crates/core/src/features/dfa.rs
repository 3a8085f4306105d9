//! Detrended fluctuation analysis.
//!
//! The profile `Y(k) = sum_{j<=k} (x_j - mean)` is cut into non-overlapping
//! boxes of size `s`, taken once from the start and once from the end. Each
//! box is detrended with a least-squares polynomial and `F(s)` is the root
//! mean square of the residuals over all boxes. The exponent is the slope of
//! `ln F(s)` against `ln s`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DfaError {
    #[error("series of length {len} yields {found} box sizes under {config:?}, need at least {MIN_SCALES}")]
    TooFewScales {
        len: usize,
        found: usize,
        config: DfaConfig,
    },
    #[error("invalid DFA config: {0}")]
    InvalidConfig(String),
}

pub const MIN_SCALES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DfaConfig {
    pub min_box: usize,
    pub max_box_fraction: f64,
    pub boxes_per_decade: usize,
    pub detrend_order: usize,
}

impl Default for DfaConfig {
    fn default() -> Self {
        Self {
            min_box: 4,
            max_box_fraction: 0.25,
            boxes_per_decade: 8,
            detrend_order: 1,
        }
    }
}

impl DfaConfig {
    pub fn validate(&self) -> Result<(), DfaError> {
        if self.min_box < 4 {
            return Err(DfaError::InvalidConfig(format!("min_box {} < 4", self.min_box)));
        }
        if !(self.max_box_fraction > 0.0 && self.max_box_fraction <= 1.0) {
            return Err(DfaError::InvalidConfig(format!(
                "max_box_fraction {} outside (0, 1]",
                self.max_box_fraction
            )));
        }
        if self.boxes_per_decade < 4 {
            return Err(DfaError::InvalidConfig(format!(
                "boxes_per_decade {} < 4",
                self.boxes_per_decade
            )));
        }
        if self.detrend_order < 1 {
            return Err(DfaError::InvalidConfig("detrend_order must be >= 1".into()));
        }
        if self.min_box <= self.detrend_order + 1 {
            return Err(DfaError::InvalidConfig(format!(
                "min_box {} leaves no residual degrees of freedom for order {}",
                self.min_box, self.detrend_order
            )));
        }
        Ok(())
    }

    /// Log-spaced box sizes for a series of length `len`, ascending and unique.
    pub fn box_sizes(&self, len: usize) -> Vec<usize> {
        let max_box = (self.max_box_fraction * len as f64).floor() as usize;
        let mut sizes = Vec::new();
        let mut i = 0;
        loop {
            let s = (self.min_box as f64 * 10f64.powf(i as f64 / self.boxes_per_decade as f64)).round() as usize;
            if s > max_box {
                break;
            }
            if sizes.last() != Some(&s) {
                sizes.push(s);
            }
            i += 1;
        }
        sizes
    }
}

/// Result of a DFA fit. `degenerate` marks a series with no fluctuation
/// (constant input), reported as `alpha = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DfaEstimate {
    pub alpha: f64,
    pub degenerate: bool,
}

/// Fluctuation function `F(s)` for each box size.
pub fn fluctuation_function(values: &[f64], config: &DfaConfig) -> Result<(Vec<usize>, Vec<f64>), DfaError> {
    config.validate()?;
    let len = values.len();
    let sizes = config.box_sizes(len);
    if sizes.len() < MIN_SCALES {
        return Err(DfaError::TooFewScales {
            len,
            found: sizes.len(),
            config: *config,
        });
    }

    let mean = values.iter().sum::<f64>() / len as f64;
    let mut profile = Vec::with_capacity(len);
    let mut acc = 0.0;
    for &x in values {
        acc += x - mean;
        profile.push(acc);
    }

    let fluct = sizes
        .iter()
        .map(|&s| {
            let basis = orthonormal_polynomials(s, config.detrend_order);
            let boxes = len / s;
            let tail = len - boxes * s;
            let mut total = 0.0;
            for b in 0..boxes {
                total += residual_sq(&profile[b * s..(b + 1) * s], &basis);
                let start = tail + b * s;
                total += residual_sq(&profile[start..start + s], &basis);
            }
            (total / (2 * boxes * s) as f64).sqrt()
        })
        .collect();
    Ok((sizes, fluct))
}

pub fn dfa_exponent(values: &[f64], config: &DfaConfig) -> Result<DfaEstimate, DfaError> {
    let (sizes, fluct) = fluctuation_function(values, config)?;
    let constant = values.iter().all(|&v| v == values[0]);
    if constant || fluct.iter().any(|&f| f.is_nan() || f <= 0.0) {
        return Ok(DfaEstimate {
            alpha: 0.0,
            degenerate: true,
        });
    }
    let xs: Vec<f64> = sizes.iter().map(|&s| (s as f64).ln()).collect();
    let ys: Vec<f64> = fluct.iter().map(|f| f.ln()).collect();
    Ok(DfaEstimate {
        alpha: ols_slope(&xs, &ys),
        degenerate: false,
    })
}

pub(crate) fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Gram-Schmidt orthonormalization of `1, t, t^2, ...` on `t = 0..s`.
fn orthonormal_polynomials(s: usize, order: usize) -> Vec<Vec<f64>> {
    let center = (s as f64 - 1.0) / 2.0;
    let scale = center.max(1.0);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(order + 1);
    for p in 0..=order {
        let mut v: Vec<f64> = (0..s).map(|t| ((t as f64 - center) / scale).powi(p as i32)).collect();
        // two passes keep the basis orthogonal to round-off
        for _ in 0..2 {
            for q in &basis {
                let dot: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
                for (a, b) in v.iter_mut().zip(q) {
                    *a -= dot * b;
                }
            }
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        for a in v.iter_mut() {
            *a /= norm;
        }
        basis.push(v);
    }
    basis
}

fn residual_sq(segment: &[f64], basis: &[Vec<f64>]) -> f64 {
    let mut resid = segment.to_vec();
    for q in basis {
        let dot: f64 = segment.iter().zip(q).map(|(a, b)| a * b).sum();
        for (r, b) in resid.iter_mut().zip(q) {
            *r -= dot * b;
        }
    }
    resid.iter().map(|r| r * r).sum()
}
