//! DFA exponent stability across repeated synthetic runs and across trace lengths.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::features::{dfa_exponent, DfaConfig};
use crate::stats::{mean, std_dev, BoxStats};
use crate::synth::{generate_synthetic_trace, FamilySpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub metrics: Vec<String>,
    pub length: usize,
    /// `alphas[metric][run]`
    pub alphas: Vec<Vec<f64>>,
    pub boxes: Vec<BoxStats>,
}

impl StabilityReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,min,q1,median,q3,max,iqr,outliers\n");
        for (m, b) in self.metrics.iter().zip(&self.boxes) {
            let outliers: Vec<String> = b.outliers.iter().map(f64::to_string).collect();
            out.push_str(&format!(
                "{m},{},{},{},{},{},{},{}\n",
                b.min,
                b.q1,
                b.median,
                b.q3,
                b.max,
                b.iqr,
                outliers.join(";")
            ));
        }
        out
    }
}

fn run_alphas(spec: &FamilySpec, seed: u64, length: usize, config: &DfaConfig) -> Result<Vec<f64>, EvalError> {
    let trace = generate_synthetic_trace(spec, seed, length)?;
    trace
        .series()
        .iter()
        .map(|s| Ok(dfa_exponent(s.values(), config)?.alpha))
        .collect()
}

/// DFA exponents of `runs` traces seeded `seed, seed+1, ...`, summarized per metric.
pub fn dfa_stability_report(
    spec: &FamilySpec,
    runs: usize,
    length: usize,
    config: &DfaConfig,
    seed: u64,
) -> Result<StabilityReport, EvalError> {
    if runs < 2 {
        return Err(EvalError::TooFewRuns(runs));
    }
    let per_run = (0..runs)
        .into_par_iter()
        .map(|r| run_alphas(spec, seed.wrapping_add(r as u64), length, config))
        .collect::<Result<Vec<_>, _>>()?;
    let n = spec.n();
    let alphas: Vec<Vec<f64>> = (0..n).map(|m| per_run.iter().map(|r| r[m]).collect()).collect();
    let boxes = alphas.iter().map(|a| BoxStats::from_samples(a)).collect();
    Ok(StabilityReport {
        metrics: spec.schema()?.names().to_vec(),
        length,
        alphas,
        boxes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub metric: String,
    pub length: usize,
    pub mean_alpha: f64,
    pub std_alpha: f64,
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("metric,length,mean_alpha,std_alpha\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.metric, r.length, r.mean_alpha, r.std_alpha));
    }
    out
}

/// Mean and spread of the DFA exponent per (metric, length); rows are
/// ordered by metric, then length.
pub fn dfa_length_sweep(
    spec: &FamilySpec,
    lengths: &[usize],
    runs_per_length: usize,
    config: &DfaConfig,
    seed: u64,
) -> Result<Vec<SweepRow>, EvalError> {
    if lengths.is_empty() || lengths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EvalError::BadLengths);
    }
    if lengths[0] < 256 {
        return Err(EvalError::BadLengths);
    }
    if runs_per_length < 2 {
        return Err(EvalError::TooFewRuns(runs_per_length));
    }
    let names = spec.schema()?.names().to_vec();
    let per_length = lengths
        .par_iter()
        .map(|&len| {
            (0..runs_per_length)
                .map(|r| run_alphas(spec, seed.wrapping_add(r as u64), len, config))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::with_capacity(names.len() * lengths.len());
    for (m, name) in names.iter().enumerate() {
        for (&len, runs) in lengths.iter().zip(&per_length) {
            let a: Vec<f64> = runs.iter().map(|r| r[m]).collect();
            rows.push(SweepRow {
                metric: name.clone(),
                length: len,
                mean_alpha: mean(&a),
                std_alpha: std_dev(&a),
            });
        }
    }
    Ok(rows)
}
