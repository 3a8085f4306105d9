//! Synthetic traces with prescribed DFA exponents and cross-metric correlation.
//!
//! Each metric starts as an independent power-law noise built in the
//! frequency domain (spectral index `beta = 2 * alpha - 1`), standardized to
//! unit variance. The metrics are then mixed by the lower Cholesky factor of
//! the correlation template, scaled by the amplitude and shifted by the
//! offset.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trace::{MetricSchema, TimeSeries, Trace, TraceError};

/// The generated series is cut from a longer periodic realization so the
/// wrap-around constraint does not flatten the largest DFA scales.
const OVERSAMPLE: usize = 8;
const SYMMETRY_TOL: f64 = 1e-12;
const EIGEN_CLAMP: f64 = -1e-10;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("family spec field `{field}`: {message}")]
    InvalidSpec { field: &'static str, message: String },
    #[error("correlation template is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("trace length {0} must be a power of two and at least 256")]
    BadLength(usize),
    #[error(transparent)]
    Trace(#[from] TraceError),
}

fn default_interval() -> f64 {
    0.25
}

/// Generation controls for one synthetic family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<Vec<String>>,
    pub alpha_targets: Vec<f64>,
    pub correlation: Vec<Vec<f64>>,
    pub amplitudes: Vec<f64>,
    pub offsets: Vec<f64>,
    #[serde(default = "default_interval")]
    pub sampling_interval: f64,
}

impl FamilySpec {
    /// Identity correlation, unit amplitude, zero offset.
    pub fn independent(alpha_targets: Vec<f64>) -> Self {
        let n = alpha_targets.len();
        let correlation = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self {
            family: None,
            metrics: None,
            alpha_targets,
            correlation,
            amplitudes: vec![1.0; n],
            offsets: vec![0.0; n],
            sampling_interval: default_interval(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, SynthError> {
        let spec: Self = serde_json::from_str(text).map_err(|e| SynthError::InvalidSpec {
            field: "document",
            message: e.to_string(),
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn n(&self) -> usize {
        self.alpha_targets.len()
    }

    pub fn schema(&self) -> Result<MetricSchema, SynthError> {
        match &self.metrics {
            Some(names) => MetricSchema::new(names.clone()).map_err(|e| SynthError::InvalidSpec {
                field: "metrics",
                message: e.to_string(),
            }),
            None => Ok(MetricSchema::numbered(self.n())?),
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let n = self.n();
        let invalid = |field, message: String| Err(SynthError::InvalidSpec { field, message });
        if n < 2 {
            return invalid("alpha_targets", format!("need at least 2 metrics, got {n}"));
        }
        if let Some(a) = self.alpha_targets.iter().find(|a| !(**a > 0.0 && **a < 2.0)) {
            return invalid("alpha_targets", format!("{a} outside (0, 2)"));
        }
        if self.amplitudes.len() != n {
            return invalid(
                "amplitudes",
                format!("expected {n} entries, got {}", self.amplitudes.len()),
            );
        }
        if let Some(a) = self.amplitudes.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return invalid("amplitudes", format!("{a} must be positive"));
        }
        if self.offsets.len() != n {
            return invalid("offsets", format!("expected {n} entries, got {}", self.offsets.len()));
        }
        if self.offsets.iter().any(|o| !o.is_finite()) {
            return invalid("offsets", "non-finite entry".into());
        }
        if !(self.sampling_interval.is_finite() && self.sampling_interval > 0.0) {
            return invalid(
                "sampling_interval",
                format!("{} must be positive", self.sampling_interval),
            );
        }
        if self.correlation.len() != n || self.correlation.iter().any(|r| r.len() != n) {
            return invalid("correlation", format!("must be a {n}x{n} matrix"));
        }
        for i in 0..n {
            if self.correlation[i][i] != 1.0 {
                return invalid("correlation", format!("diagonal entry {i} is not 1"));
            }
            for j in 0..i {
                let (a, b) = (self.correlation[i][j], self.correlation[j][i]);
                if !a.is_finite() || (a - b).abs() > SYMMETRY_TOL {
                    return invalid("correlation", format!("entries ({i},{j}) and ({j},{i}) differ"));
                }
            }
        }
        self.schema()?;
        Ok(())
    }
}

/// Lower-triangular factor `L` with `L Lᵀ = template`.
///
/// Eigenvalues down to -1e-10 are tolerated as round-off; pivots that vanish
/// after that leave a zero column instead of failing.
pub fn correlation_factor(template: &[Vec<f64>]) -> Result<DMatrix<f64>, SynthError> {
    let n = template.len();
    let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (template[i][j] + template[j][i]));
    let min_eig = SymmetricEigen::new(m.clone()).eigenvalues.min();
    if min_eig < EIGEN_CLAMP {
        return Err(SynthError::NotPsd(min_eig));
    }
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut pivot = m[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        if pivot <= 1e-12 {
            continue;
        }
        let d = pivot.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Power-law noise with spectrum `1/f^beta`, zero mean and unit variance.
pub fn power_law_noise<R: rand::Rng>(rng: &mut R, beta: f64, len: usize, planner: &mut FftPlanner<f64>) -> Vec<f64> {
    let total = len * OVERSAMPLE;
    let mut spectrum = vec![Complex64::new(0.0, 0.0); total];
    let half = total / 2;
    for k in 1..=half {
        let amp = (k as f64).powf(-beta / 2.0);
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        if k == half {
            spectrum[k] = Complex64::new(amp * re, 0.0);
        } else {
            spectrum[k] = Complex64::new(amp * re, amp * im);
            spectrum[total - k] = spectrum[k].conj();
        }
    }
    planner.plan_fft_inverse(total).process(&mut spectrum);
    let mut out: Vec<f64> = spectrum[..len].iter().map(|c| c.re).collect();
    standardize_in_place(&mut out);
    out
}

fn standardize_in_place(values: &mut [f64]) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
    for v in values.iter_mut() {
        *v = (*v - mean) / sd;
    }
}

/// Deterministic in `(spec, seed, length)`.
pub fn generate_synthetic_trace(spec: &FamilySpec, seed: u64, length: usize) -> Result<Trace, SynthError> {
    if length < 256 || !length.is_power_of_two() {
        return Err(SynthError::BadLength(length));
    }
    spec.validate()?;
    let factor = correlation_factor(&spec.correlation)?;
    let n = spec.n();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut planner = FftPlanner::new();
    let sources: Vec<Vec<f64>> = spec
        .alpha_targets
        .iter()
        .map(|&alpha| power_law_noise(&mut rng, 2.0 * alpha - 1.0, length, &mut planner))
        .collect();

    let mut series = Vec::with_capacity(n);
    for i in 0..n {
        let mut values = vec![0.0; length];
        for (j, source) in sources.iter().enumerate().take(i + 1) {
            let w = factor[(i, j)];
            if w == 0.0 {
                continue;
            }
            for (v, s) in values.iter_mut().zip(source) {
                *v += w * s;
            }
        }
        for v in values.iter_mut() {
            *v = spec.amplitudes[i] * *v + spec.offsets[i];
        }
        series.push(TimeSeries::new(values, spec.sampling_interval)?);
    }
    let family = spec.family.as_deref().unwrap_or("synthetic");
    Ok(Trace::new(spec.schema()?, series, format!("{family}_{seed}"))?)
}
