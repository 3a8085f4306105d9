//! Fingerprint extraction: one DFA exponent per metric followed by the
//! pairwise Pearson coefficients of the metrics.

mod correlation;
mod dfa;

pub use correlation::{correlation_matrix, pearson, Correlation, CorrelationMatrix};
pub use dfa::{dfa_exponent, fluctuation_function, DfaConfig, DfaError, DfaEstimate, MIN_SCALES};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trace::{MetricSchema, Trace};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("metric {metric}: {source}")]
    Dfa {
        metric: String,
        #[source]
        source: DfaError,
    },
    #[error("names and values differ in length ({names} vs {values})")]
    Misaligned { names: usize, values: usize },
    #[error("non-finite value for feature {0}")]
    NonFinite(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Named feature values in canonical order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    names: Vec<String>,
    values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    degenerate: Vec<String>,
}

impl FeatureVector {
    pub fn new(names: Vec<String>, values: Vec<f64>) -> Result<Self, FeatureError> {
        if names.len() != values.len() {
            return Err(FeatureError::Misaligned {
                names: names.len(),
                values: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FeatureError::NonFinite(names[i].clone()));
        }
        Ok(Self {
            names,
            values,
            degenerate: Vec::new(),
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Features that came from a constant metric (reported as 0).
    pub fn degenerate(&self) -> &[String] {
        &self.degenerate
    }

    /// `feature,value` CSV, one row per feature.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("feature,value\n");
        for (name, value) in self.names.iter().zip(&self.values) {
            out.push_str(name);
            out.push(',');
            out.push_str(&value.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, FeatureError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "feature,value")) => {}
            _ => {
                return Err(FeatureError::Parse {
                    line: 1,
                    message: "expected header `feature,value`".into(),
                })
            }
        }
        let mut names = Vec::new();
        let mut values = Vec::new();
        for (idx, line) in lines {
            if line.is_empty() {
                continue;
            }
            let (name, value) = line.split_once(',').ok_or_else(|| FeatureError::Parse {
                line: idx + 1,
                message: "expected `feature,value`".into(),
            })?;
            let value: f64 = value.parse().map_err(|_| FeatureError::Parse {
                line: idx + 1,
                message: format!("non-numeric value {value:?}"),
            })?;
            names.push(name.to_string());
            values.push(value);
        }
        Self::new(names, values)
    }
}

/// Canonical feature names for a schema: `dfa:<m>` then `corr:<mi>:<mj>`.
pub fn feature_names(schema: &MetricSchema) -> Vec<String> {
    let names = schema.names();
    let mut out: Vec<String> = names.iter().map(|m| format!("dfa:{m}")).collect();
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            out.push(format!("corr:{}:{}", names[i], names[j]));
        }
    }
    out
}

/// Number of fingerprint features for `n` metrics: `n(n+1)/2`.
pub fn feature_count(n: usize) -> usize {
    n * (n + 1) / 2
}

pub fn fingerprint(trace: &Trace, config: &DfaConfig) -> Result<FeatureVector, FeatureError> {
    let schema = trace.schema();
    let dfa: Vec<DfaEstimate> = trace
        .series()
        .par_iter()
        .zip(schema.names().par_iter())
        .map(|(s, name)| {
            dfa_exponent(s.values(), config).map_err(|source| FeatureError::Dfa {
                metric: name.clone(),
                source,
            })
        })
        .collect::<Result<_, _>>()?;
    let corr = correlation_matrix(trace);

    let names = feature_names(schema);
    let mut values: Vec<f64> = dfa.iter().map(|d| d.alpha).collect();
    let mut flags: Vec<bool> = dfa.iter().map(|d| d.degenerate).collect();
    for (i, j, r) in corr.upper_triangle() {
        values.push(r);
        flags.push(corr.is_degenerate(i, j));
    }
    let mut fv = FeatureVector::new(names, values)?;
    fv.degenerate = fv
        .names
        .iter()
        .zip(flags)
        .filter(|(_, f)| *f)
        .map(|(n, _)| n.clone())
        .collect();
    Ok(fv)
}
