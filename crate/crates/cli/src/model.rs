use anyhow::{bail, Context, Result};
use rcfp::classifier::{Prediction, TrainedPipeline};
use rcfp::{fingerprint, DfaConfig, MetricSchema, Trace};
use serde::{Deserialize, Serialize};

pub const MODEL_VERSION: u32 = 1;

/// Everything needed to classify a raw trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub version: u32,
    pub schema: MetricSchema,
    pub dfa: DfaConfig,
    pub pipeline: TrainedPipeline,
}

impl ModelFile {
    pub fn new(schema: MetricSchema, dfa: DfaConfig, pipeline: TrainedPipeline) -> Self {
        Self {
            version: MODEL_VERSION,
            schema,
            dfa,
            pipeline,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model serializes");
        s.push('\n');
        s
    }

    /// Checks the version before decoding the rest of the document.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: serde_json::Value = serde_json::from_str(text).context("model file is not JSON")?;
        match doc.get("version").and_then(serde_json::Value::as_u64) {
            Some(v) if v == MODEL_VERSION as u64 => {}
            Some(v) => bail!("model file version {v} is not supported (expected {MODEL_VERSION})"),
            None => bail!("model file has no version field"),
        }
        serde_json::from_value(doc).context("decoding model file")
    }

    pub fn classify_trace(&self, trace: &Trace) -> Result<Prediction> {
        if trace.schema() != &self.schema {
            bail!(
                "schema mismatch: trace has [{}], model expects [{}]",
                trace.schema().names().join(","),
                self.schema.names().join(",")
            );
        }
        let fv = fingerprint(trace, &self.dfa)?;
        Ok(self.pipeline.classify(&fv)?)
    }
}
