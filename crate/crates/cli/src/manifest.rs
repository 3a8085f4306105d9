//! Labeled manifests: CSV rows `path,family[,sample]`, paths relative to the
//! manifest's directory. An optional header row starting with `path` is skipped.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use rcfp::evaluation::SampleRuns;
use rcfp::{fingerprint, parse_trace, DfaConfig, FamilyLabel, FeatureVector, MetricSchema, Trace};

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub family: FamilyLabel,
    pub sample: Option<String>,
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut entries = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("{}: malformed CSV", path.display()))?;
        let line = record.position().map_or(i as u64 + 1, |p| p.line());
        if i == 0 && record.get(0) == Some("path") {
            continue;
        }
        if record.len() < 2 || record.len() > 3 {
            bail!(
                "{}:{line}: expected `path,family[,sample]`, got {} fields",
                path.display(),
                record.len()
            );
        }
        if record[1].is_empty() {
            bail!("{}:{line}: empty family label", path.display());
        }
        let trace = base.join(&record[0]);
        if !trace.is_file() {
            bail!(
                "{}:{line}: trace file {} does not exist",
                path.display(),
                trace.display()
            );
        }
        entries.push(ManifestEntry {
            path: trace,
            family: FamilyLabel::new(&record[1]),
            sample: record.get(2).filter(|s| !s.is_empty()).map(str::to_string),
        });
    }
    if entries.is_empty() {
        bail!("manifest {} lists no traces", path.display());
    }
    Ok(entries)
}

pub fn load_trace(path: &Path, expected: Option<&MetricSchema>) -> Result<Trace> {
    let text = fs::read_to_string(path).with_context(|| format!("reading trace {}", path.display()))?;
    let trace = parse_trace(&text, None).with_context(|| format!("parsing trace {}", path.display()))?;
    if let Some(schema) = expected {
        if trace.schema() != schema {
            bail!(
                "schema mismatch: trace {} has [{}], expected [{}]",
                path.display(),
                trace.schema().names().join(","),
                schema.names().join(",")
            );
        }
    }
    Ok(trace)
}

/// Fingerprints every listed trace. All traces must share the first one's schema.
pub fn fingerprint_entries(entries: &[ManifestEntry], dfa: &DfaConfig) -> Result<(MetricSchema, Vec<FeatureVector>)> {
    let first = load_trace(&entries[0].path, None)?;
    let schema = first.schema().clone();
    let fps = entries
        .par_iter()
        .map(|e| {
            let trace = load_trace(&e.path, Some(&schema))?;
            fingerprint(&trace, dfa).with_context(|| format!("fingerprinting {}", e.path.display()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((schema, fps))
}

/// Groups runs into samples. With a `sample` column rows sharing
/// `(family, sample)` form one sample; otherwise consecutive rows of a family
/// are taken `q_runs` at a time.
pub fn group_samples(entries: &[ManifestEntry], fps: Vec<FeatureVector>, q_runs: usize) -> Result<Vec<SampleRuns>> {
    if q_runs == 0 {
        bail!("q-runs must be at least 1");
    }
    let explicit = entries.iter().filter(|e| e.sample.is_some()).count();
    if explicit != 0 && explicit != entries.len() {
        bail!("manifest mixes rows with and without a sample column");
    }
    let mut groups: BTreeMap<(FamilyLabel, String), Vec<FeatureVector>> = BTreeMap::new();
    let mut order = Vec::new();
    let mut counters: BTreeMap<FamilyLabel, usize> = BTreeMap::new();
    for (e, fv) in entries.iter().zip(fps) {
        let id = match &e.sample {
            Some(s) => s.clone(),
            None => {
                let c = counters.entry(e.family.clone()).or_default();
                let id = format!("{}#{}", e.family, *c / q_runs);
                *c += 1;
                id
            }
        };
        let key = (e.family.clone(), id);
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(fv);
    }
    if explicit == 0 {
        for (family, n) in &counters {
            if n % q_runs != 0 {
                bail!("family {family} has {n} traces, not a multiple of q-runs {q_runs}");
            }
        }
    }
    Ok(order
        .into_iter()
        .map(|key| {
            let runs = groups.remove(&key).unwrap_or_default();
            SampleRuns {
                id: key.1,
                family: key.0,
                runs,
            }
        })
        .collect())
}
