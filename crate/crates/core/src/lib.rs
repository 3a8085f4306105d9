//! Resource-consumption fingerprinting and family classification.
//!
//! Multi-metric time series (one [`trace::Trace`] per execution run) are turned
//! into fingerprints made of per-metric DFA exponents and pairwise Pearson
//! correlations. Fingerprints are ranked by mutual information with the
//! family label, reduced with PCA and classified by a one-vs-one RBF C-SVM
//! trained with SMO.

pub mod classifier;
pub mod collector;
pub mod evaluation;
pub mod features;
pub mod selection;
pub mod stats;
pub mod synth;
pub mod trace;

pub use features::{fingerprint, DfaConfig, FeatureVector};
pub use trace::{parse_trace, write_trace, FamilyLabel, LabeledTrace, MetricSchema, TimeSeries, Trace};
