//! Periodic sampling of a proc-style directory tree into canonical traces.
//!
//! Each metric is read by a [`MetricRule`]: a file below the source root, the
//! first line starting with a prefix, and a whitespace token on that line.
//! Counters are emitted as per-interval deltas, gauges raw.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::thread;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trace::{csv_header, csv_row, MetricSchema, TraceError};

#[derive(Debug, Error)]
pub enum CollectError {
    #[error("metric {metric}: cannot read {path}: {source}")]
    MissingFile {
        metric: String,
        path: PathBuf,
        source: io::Error,
    },
    #[error("metric {metric}: no line starting with {prefix:?} in {path}")]
    MissingPrefix {
        metric: String,
        path: PathBuf,
        prefix: String,
    },
    #[error("metric {metric}: token {token} requested but line in {path} has {found} tokens")]
    ShortTokens {
        metric: String,
        path: PathBuf,
        token: usize,
        found: usize,
    },
    #[error("metric {metric}: token {token} in {path} is not a number: {text:?}")]
    NotNumeric {
        metric: String,
        path: PathBuf,
        token: usize,
        text: String,
    },
    #[error("metric {metric}: path {path} uses {{pid}} but no pid was given")]
    MissingPid { metric: String, path: String },
    #[error("no rule for schema metric {0}")]
    MissingRule(String),
    #[error("rule for {0} does not match any schema metric")]
    UnknownRule(String),
    #[error("duplicate rule for {0}")]
    DuplicateRule(String),
    #[error("sampling interval must be positive and finite, got {0}")]
    BadInterval(f64),
    #[error("sample bound must be at least one sample")]
    EmptyBound,
    #[error("invalid rule file: {0}")]
    RuleFile(#[from] serde_json::Error),
    #[error("writing trace: {0}")]
    Io(#[from] io::Error),
    #[error(transparent)]
    Schema(#[from] TraceError),
    #[error("sampling stopped after {rows_written} rows: {source}")]
    Interrupted {
        rows_written: usize,
        #[source]
        source: Box<CollectError>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Counter,
    Gauge,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricRule {
    pub metric: String,
    /// Relative to the source root; `{pid}` is replaced with the target pid.
    pub path: String,
    /// Selects the first line whose trimmed start begins with this prefix;
    /// empty selects the first line.
    #[serde(default)]
    pub prefix: String,
    /// Whitespace token index on the selected line, the prefix token included.
    pub token: usize,
    pub kind: MetricKind,
}

impl MetricRule {
    pub fn new(metric: &str, path: &str, prefix: &str, token: usize, kind: MetricKind) -> Self {
        Self {
            metric: metric.to_string(),
            path: path.to_string(),
            prefix: prefix.to_string(),
            token,
            kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcSourceSpec {
    pub root: PathBuf,
    pub rules: Vec<MetricRule>,
    pub pid: Option<u32>,
}

impl ProcSourceSpec {
    pub fn new(root: impl Into<PathBuf>, rules: Vec<MetricRule>, pid: Option<u32>) -> Self {
        Self {
            root: root.into(),
            rules,
            pid,
        }
    }

    /// Schema in rule order.
    pub fn schema(&self) -> Result<MetricSchema, CollectError> {
        Ok(MetricSchema::new(self.rules.iter().map(|r| r.metric.clone()))?)
    }

    fn resolve(&self, rule: &MetricRule) -> Result<PathBuf, CollectError> {
        let rel = if rule.path.contains("{pid}") {
            let pid = self.pid.ok_or_else(|| CollectError::MissingPid {
                metric: rule.metric.clone(),
                path: rule.path.clone(),
            })?;
            rule.path.replace("{pid}", &pid.to_string())
        } else {
            rule.path.clone()
        };
        Ok(self.root.join(rel))
    }
}

/// Parses a rule file: a JSON list of rules.
pub fn parse_rules(text: &str) -> Result<Vec<MetricRule>, CollectError> {
    Ok(serde_json::from_str(text)?)
}

/// Pulls one value out of file contents according to `rule`.
pub fn extract(text: &str, rule: &MetricRule, path: &Path) -> Result<f64, CollectError> {
    let line = text
        .lines()
        .find(|l| l.trim_start().starts_with(rule.prefix.as_str()))
        .ok_or_else(|| CollectError::MissingPrefix {
            metric: rule.metric.clone(),
            path: path.to_path_buf(),
            prefix: rule.prefix.clone(),
        })?;
    let tokens: Vec<&str> = line.split_whitespace().collect();
    let token = tokens.get(rule.token).ok_or_else(|| CollectError::ShortTokens {
        metric: rule.metric.clone(),
        path: path.to_path_buf(),
        token: rule.token,
        found: tokens.len(),
    })?;
    match token.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CollectError::NotNumeric {
            metric: rule.metric.clone(),
            path: path.to_path_buf(),
            token: rule.token,
            text: token.to_string(),
        }),
    }
}

/// Holds resolved rules in schema order and the previous counter readings.
#[derive(Debug)]
pub struct Sampler {
    schema: MetricSchema,
    rules: Vec<(MetricRule, PathBuf)>,
    previous: Vec<Option<f64>>,
}

impl Sampler {
    pub fn new(spec: &ProcSourceSpec, schema: &MetricSchema) -> Result<Self, CollectError> {
        let mut slots: Vec<Option<(MetricRule, PathBuf)>> = vec![None; schema.len()];
        for rule in &spec.rules {
            let i = schema
                .index_of(&rule.metric)
                .ok_or_else(|| CollectError::UnknownRule(rule.metric.clone()))?;
            if slots[i].is_some() {
                return Err(CollectError::DuplicateRule(rule.metric.clone()));
            }
            slots[i] = Some((rule.clone(), spec.resolve(rule)?));
        }
        let rules = slots
            .into_iter()
            .zip(schema.names())
            .map(|(slot, name)| slot.ok_or_else(|| CollectError::MissingRule(name.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            schema: schema.clone(),
            previous: vec![None; rules.len()],
            rules,
        })
    }

    pub fn schema(&self) -> &MetricSchema {
        &self.schema
    }

    /// Reads every rule once. Raw readings are taken for all metrics before
    /// counter state is updated, so a failed sample leaves the state untouched.
    pub fn sample_once(&mut self) -> Result<Vec<f64>, CollectError> {
        let raw = self
            .rules
            .iter()
            .map(|(rule, path)| {
                let text = fs::read_to_string(path).map_err(|source| CollectError::MissingFile {
                    metric: rule.metric.clone(),
                    path: path.clone(),
                    source,
                })?;
                extract(&text, rule, path)
            })
            .collect::<Result<Vec<f64>, _>>()?;
        let row = raw
            .iter()
            .zip(&self.rules)
            .zip(&mut self.previous)
            .map(|((&v, (rule, _)), prev)| match rule.kind {
                MetricKind::Gauge => v,
                MetricKind::Counter => {
                    let delta = prev.map_or(0.0, |p| v - p);
                    *prev = Some(v);
                    // a decreasing counter was reset or wrapped
                    delta.max(0.0)
                }
            })
            .collect();
        Ok(row)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SampleBound {
    Samples(usize),
    /// Seconds; converted to `floor(duration / interval)` samples.
    Duration(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub sampling_interval: f64,
    pub bound: SampleBound,
    pub schema: MetricSchema,
}

impl SamplerConfig {
    pub fn sample_count(&self) -> Result<usize, CollectError> {
        let tau = self.sampling_interval;
        if !(tau.is_finite() && tau > 0.0) {
            return Err(CollectError::BadInterval(tau));
        }
        let n = match self.bound {
            SampleBound::Samples(n) => n,
            SampleBound::Duration(d) if d.is_finite() && d > 0.0 => (d / tau + 1e-9).floor() as usize,
            SampleBound::Duration(_) => 0,
        };
        if n == 0 {
            return Err(CollectError::EmptyBound);
        }
        Ok(n)
    }
}

/// Written next to the trace as `<trace>.meta.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollectMetadata {
    pub start_unix: f64,
    pub sampling_interval: f64,
    pub samples: usize,
    pub max_jitter_s: f64,
    /// Observed tick instant minus nominal `k * interval`, per written row.
    pub tick_offsets_s: Vec<f64>,
}

pub fn metadata_path(trace: &Path) -> PathBuf {
    let mut name = trace.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// Samples at absolute deadlines `start + k * interval` and streams rows to
/// `out`. Timestamps are nominal. On a sampling error the rows written so far
/// stay in the file and the sidecar is still written.
pub fn collect(spec: &ProcSourceSpec, config: &SamplerConfig, out: &Path) -> Result<CollectMetadata, CollectError> {
    let n = config.sample_count()?;
    let tau = config.sampling_interval;
    let mut sampler = Sampler::new(spec, &config.schema)?;
    let mut writer = BufWriter::new(File::create(out)?);
    writeln!(writer, "{}", csv_header(&config.schema))?;
    writer.flush()?;

    let start_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0);
    let start = Instant::now();
    let mut offsets = Vec::with_capacity(n);
    let mut failure = None;
    for k in 0..n {
        let nominal = k as f64 * tau;
        let deadline = start + Duration::from_secs_f64(nominal);
        let now = Instant::now();
        if deadline > now {
            thread::sleep(deadline - now);
        }
        let offset = start.elapsed().as_secs_f64() - nominal;
        match sampler.sample_once() {
            Ok(row) => {
                writeln!(writer, "{}", csv_row(nominal, &row))?;
                writer.flush()?;
                offsets.push(offset);
            }
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    writer.flush()?;
    drop(writer);

    let meta = CollectMetadata {
        start_unix,
        sampling_interval: tau,
        samples: offsets.len(),
        max_jitter_s: offsets.iter().fold(0.0_f64, |m, o| m.max(o.abs())),
        tick_offsets_s: offsets,
    };
    fs::write(metadata_path(out), serde_json::to_string_pretty(&meta)?)?;
    match failure {
        Some(e) => {
            log::warn!("collection stopped early: {e}");
            Err(CollectError::Interrupted {
                rows_written: meta.samples,
                source: Box::new(e),
            })
        }
        None => Ok(meta),
    }
}

/// 26-metric rule set for a Linux `/proc`: system CPU, memory, per-process
/// usage of the target pid and its network namespace counters on `eth0`.
pub fn default_rules() -> Vec<MetricRule> {
    use MetricKind::{Counter, Gauge};
    let r = MetricRule::new;
    vec![
        r("cpu_user", "stat", "cpu ", 1, Counter),
        r("cpu_nice", "stat", "cpu ", 2, Counter),
        r("cpu_system", "stat", "cpu ", 3, Counter),
        r("cpu_idle", "stat", "cpu ", 4, Counter),
        r("cpu_iowait", "stat", "cpu ", 5, Counter),
        r("ctxt_switches", "stat", "ctxt", 1, Counter),
        r("procs_running", "stat", "procs_running", 1, Gauge),
        r("mem_free", "meminfo", "MemFree:", 1, Gauge),
        r("mem_available", "meminfo", "MemAvailable:", 1, Gauge),
        r("mem_buffers", "meminfo", "Buffers:", 1, Gauge),
        r("mem_cached", "meminfo", "Cached:", 1, Gauge),
        r("swap_free", "meminfo", "SwapFree:", 1, Gauge),
        // /proc/<pid>/stat fields, assuming a comm without spaces
        r("utime", "{pid}/stat", "", 13, Counter),
        r("stime", "{pid}/stat", "", 14, Counter),
        r("num_threads", "{pid}/stat", "", 19, Gauge),
        r("vsize", "{pid}/stat", "", 22, Gauge),
        r("rss", "{pid}/stat", "", 23, Gauge),
        r("minflt", "{pid}/stat", "", 9, Counter),
        r("majflt", "{pid}/stat", "", 11, Counter),
        r("read_bytes", "{pid}/io", "read_bytes:", 1, Counter),
        r("write_bytes", "{pid}/io", "write_bytes:", 1, Counter),
        r("rx_bytes", "{pid}/net/dev", "eth0:", 1, Counter),
        r("rx_packets", "{pid}/net/dev", "eth0:", 2, Counter),
        r("tx_bytes", "{pid}/net/dev", "eth0:", 9, Counter),
        r("tx_packets", "{pid}/net/dev", "eth0:", 10, Counter),
        r("tcp_sockets_in_use", "net/sockstat", "TCP:", 2, Gauge),
    ]
}

pub fn default_schema() -> MetricSchema {
    MetricSchema::new(default_rules().into_iter().map(|r| r.metric)).expect("default rule names are valid")
}
