//! Trace data model and the canonical trace CSV format.
//!
//! A trace is one execution run: `n` metrics sampled on a common clock with
//! a fixed interval. On disk it is a CSV whose first column is the timestamp
//! in seconds.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Minimum number of samples per series accepted by the model.
pub const MIN_SERIES_LEN: usize = 64;

const SPACING_REL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TraceError {
    #[error("metric schema needs at least 2 metrics, got {0}")]
    TooFewMetrics(usize),
    #[error("invalid metric name {0:?}: names must be non-empty without commas or whitespace")]
    InvalidMetricName(String),
    #[error("duplicate metric name {0:?}")]
    DuplicateMetric(String),
    #[error("series has {len} samples, need at least {min}")]
    TooShort { len: usize, min: usize },
    #[error("non-finite value at sample {index}")]
    NonFinite { index: usize },
    #[error("sampling interval must be positive and finite, got {0}")]
    BadInterval(f64),
    #[error("trace has {series} series for {metrics} metrics")]
    SeriesCount { series: usize, metrics: usize },
    #[error("series {metric} has length {len}, expected {expected}")]
    RaggedSeries {
        metric: String,
        len: usize,
        expected: usize,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("schema mismatch: file has [{found}], expected [{expected}]")]
    SchemaMismatch { expected: String, found: String },
}

pub type Result<T> = std::result::Result<T, TraceError>;

/// Ordered, duplicate-free list of metric identifiers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct MetricSchema {
    names: Vec<String>,
}

impl MetricSchema {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() < 2 {
            return Err(TraceError::TooFewMetrics(names.len()));
        }
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() || name.contains(',') || name.chars().any(char::is_whitespace) {
                return Err(TraceError::InvalidMetricName(name.clone()));
            }
            if names[..i].contains(name) {
                return Err(TraceError::DuplicateMetric(name.clone()));
            }
        }
        Ok(Self { names })
    }

    /// `m1, m2, ..., mn`
    pub fn numbered(n: usize) -> Result<Self> {
        Self::new((1..=n).map(|i| format!("m{i}")))
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

impl TryFrom<Vec<String>> for MetricSchema {
    type Error = TraceError;

    fn try_from(names: Vec<String>) -> Result<Self> {
        Self::new(names)
    }
}

impl From<MetricSchema> for Vec<String> {
    fn from(schema: MetricSchema) -> Self {
        schema.names
    }
}

impl fmt::Display for MetricSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.names.join(","))
    }
}

/// Samples of one metric at a fixed interval.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    sampling_interval: f64,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>, sampling_interval: f64) -> Result<Self> {
        if !(sampling_interval.is_finite() && sampling_interval > 0.0) {
            return Err(TraceError::BadInterval(sampling_interval));
        }
        if values.len() < MIN_SERIES_LEN {
            return Err(TraceError::TooShort {
                len: values.len(),
                min: MIN_SERIES_LEN,
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(TraceError::NonFinite { index });
        }
        Ok(Self {
            values,
            sampling_interval,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sampling_interval(&self) -> f64 {
        self.sampling_interval
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Family (class) identifier; compared by exact string equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FamilyLabel(String);

impl FamilyLabel {
    /// Panics on an empty id.
    pub fn new(id: impl Into<String>) -> Self {
        let id = id.into();
        assert!(!id.is_empty(), "family label must be non-empty");
        Self(id)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for FamilyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for FamilyLabel {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

/// One execution run: a series per schema metric, all on the same clock.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    schema: MetricSchema,
    series: Vec<TimeSeries>,
    start: f64,
    run_id: String,
}

impl Trace {
    pub fn new(schema: MetricSchema, series: Vec<TimeSeries>, run_id: impl Into<String>) -> Result<Self> {
        Self::with_start(schema, series, 0.0, run_id)
    }

    /// Like [`Trace::new`] with a non-zero timestamp for the first sample.
    pub fn with_start(
        schema: MetricSchema,
        series: Vec<TimeSeries>,
        start: f64,
        run_id: impl Into<String>,
    ) -> Result<Self> {
        if series.len() != schema.len() {
            return Err(TraceError::SeriesCount {
                series: series.len(),
                metrics: schema.len(),
            });
        }
        let expected = series[0].len();
        let interval = series[0].sampling_interval();
        for (name, s) in schema.names().iter().zip(&series) {
            if s.len() != expected {
                return Err(TraceError::RaggedSeries {
                    metric: name.clone(),
                    len: s.len(),
                    expected,
                });
            }
            if s.sampling_interval() != interval {
                return Err(TraceError::BadInterval(s.sampling_interval()));
            }
        }
        Ok(Self {
            schema,
            series,
            start,
            run_id: run_id.into(),
        })
    }

    /// Builds a trace from row-major samples (`rows[t][metric]`).
    pub fn from_rows(
        schema: MetricSchema,
        rows: &[Vec<f64>],
        sampling_interval: f64,
        run_id: impl Into<String>,
    ) -> Result<Self> {
        let n = schema.len();
        let mut columns = vec![Vec::with_capacity(rows.len()); n];
        for row in rows {
            if row.len() != n {
                return Err(TraceError::SeriesCount {
                    series: row.len(),
                    metrics: n,
                });
            }
            for (col, &v) in columns.iter_mut().zip(row) {
                col.push(v);
            }
        }
        let series = columns
            .into_iter()
            .map(|c| TimeSeries::new(c, sampling_interval))
            .collect::<Result<Vec<_>>>()?;
        Self::new(schema, series, run_id)
    }

    pub fn schema(&self) -> &MetricSchema {
        &self.schema
    }

    pub fn series(&self) -> &[TimeSeries] {
        &self.series
    }

    pub fn metric(&self, index: usize) -> &TimeSeries {
        &self.series[index]
    }

    pub fn len(&self) -> usize {
        self.series[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sampling_interval(&self) -> f64 {
        self.series[0].sampling_interval()
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn run_id(&self) -> &str {
        &self.run_id
    }

    pub fn set_run_id(&mut self, run_id: impl Into<String>) {
        self.run_id = run_id.into();
    }

    pub fn timestamp(&self, k: usize) -> f64 {
        self.start + k as f64 * self.sampling_interval()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledTrace {
    pub trace: Trace,
    pub family: FamilyLabel,
}

/// Canonical CSV header line for a schema (no trailing newline).
pub fn csv_header(schema: &MetricSchema) -> String {
    let mut header = String::from("timestamp");
    for name in schema.names() {
        header.push(',');
        header.push_str(name);
    }
    header
}

/// One canonical CSV row (no trailing newline).
pub fn csv_row(timestamp: f64, values: &[f64]) -> String {
    let mut line = timestamp.to_string();
    for v in values {
        line.push(',');
        line.push_str(&v.to_string());
    }
    line
}

/// Serializes a trace to canonical CSV.
///
/// Numbers use Rust's shortest round-trip formatting, lines end in `\n`.
pub fn write_trace(trace: &Trace) -> String {
    let n = trace.schema().len();
    let mut out = csv_header(trace.schema());
    out.push('\n');
    let mut row = vec![0.0; n];
    for k in 0..trace.len() {
        for (slot, s) in row.iter_mut().zip(trace.series()) {
            *slot = s.values()[k];
        }
        out.push_str(&csv_row(trace.timestamp(k), &row));
        out.push('\n');
    }
    out
}

/// Parses trace CSV text; `expected` pins the header (order-sensitive).
pub fn parse_trace(text: &str, expected: Option<&MetricSchema>) -> Result<Trace> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(TraceError::Parse {
        line: 1,
        message: "empty input".into(),
    })?;
    let mut cols = header.split(',');
    if cols.next().map(str::trim) != Some("timestamp") {
        return Err(TraceError::Parse {
            line: 1,
            message: "header must start with `timestamp`".into(),
        });
    }
    let schema = MetricSchema::new(cols.map(str::to_string)).map_err(|e| TraceError::Parse {
        line: 1,
        message: format!("malformed header: {e}"),
    })?;
    if let Some(expected) = expected {
        if expected != &schema {
            return Err(TraceError::SchemaMismatch {
                expected: expected.to_string(),
                found: schema.to_string(),
            });
        }
    }

    let n = schema.len();
    let mut timestamps = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); n];
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != n + 1 {
            return Err(TraceError::Parse {
                line: line_no,
                message: format!("expected {} cells, found {}", n + 1, cells.len()),
            });
        }
        let mut parsed = Vec::with_capacity(n + 1);
        for (c, cell) in cells.iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| TraceError::Parse {
                line: line_no,
                message: format!("non-numeric value {cell:?} in column {}", c + 1),
            })?;
            if !v.is_finite() {
                return Err(TraceError::Parse {
                    line: line_no,
                    message: format!("non-finite value {cell:?} in column {}", c + 1),
                });
            }
            parsed.push(v);
        }
        timestamps.push((line_no, parsed[0]));
        for (col, v) in columns.iter_mut().zip(&parsed[1..]) {
            col.push(*v);
        }
    }

    let rows = timestamps.len();
    if rows < MIN_SERIES_LEN {
        return Err(TraceError::Parse {
            line: rows + 1,
            message: format!("{rows} data rows, need at least {MIN_SERIES_LEN}"),
        });
    }
    let start = timestamps[0].1;
    let interval = timestamps[1].1 - start;
    if interval.is_nan() || interval <= 0.0 {
        return Err(TraceError::Parse {
            line: timestamps[1].0,
            message: "timestamps must be strictly increasing".into(),
        });
    }
    for (k, &(line, t)) in timestamps.iter().enumerate().skip(2) {
        let offset = k as f64 * interval;
        if (t - start - offset).abs() > SPACING_REL_TOL * offset {
            return Err(TraceError::Parse {
                line,
                message: format!("timestamp {t} breaks the sampling interval {interval}"),
            });
        }
    }

    let series = columns
        .into_iter()
        .map(|c| TimeSeries::new(c, interval))
        .collect::<Result<Vec<_>>>()?;
    Trace::with_start(schema, series, start, "")
}
