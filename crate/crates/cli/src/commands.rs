use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use rcfp::classifier::{train_pipeline, PipelineConfig};
use rcfp::collector::{collect, default_rules, parse_rules, ProcSourceSpec, SampleBound, SamplerConfig};
use rcfp::evaluation::{dfa_length_sweep, dfa_stability_report, repeated_holdout, sweep_csv, HoldoutConfig};
use rcfp::synth::{generate_synthetic_trace, FamilySpec};
use rcfp::{fingerprint, write_trace, DfaConfig, MetricSchema};

use crate::manifest::{fingerprint_entries, group_samples, load_trace, read_manifest};
use crate::model::ModelFile;

#[derive(Debug, Clone, Default, Args)]
pub struct DfaArgs {
    /// Smallest DFA box size [default: 4]
    #[arg(long)]
    pub min_box: Option<usize>,
    /// Largest box as a fraction of the trace length [default: 0.25]
    #[arg(long)]
    pub max_box_fraction: Option<f64>,
    /// Log-spaced box sizes per decade [default: 8]
    #[arg(long)]
    pub boxes_per_decade: Option<usize>,
    /// Polynomial order of the per-box detrending [default: 1]
    #[arg(long)]
    pub detrend_order: Option<usize>,
}

impl DfaArgs {
    pub fn config(&self) -> Result<DfaConfig> {
        let d = DfaConfig::default();
        let cfg = DfaConfig {
            min_box: self.min_box.unwrap_or(d.min_box),
            max_box_fraction: self.max_box_fraction.unwrap_or(d.max_box_fraction),
            boxes_per_decade: self.boxes_per_decade.unwrap_or(d.boxes_per_decade),
            detrend_order: self.detrend_order.unwrap_or(d.detrend_order),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct PipelineArgs {
    /// Q candidates in percent [default: 10,15,...,50]
    #[arg(long, value_delimiter = ',')]
    pub q_grid: Option<Vec<u32>>,
    /// Equal-frequency bins for mutual information [default: 10]
    #[arg(long)]
    pub bins: Option<usize>,
    /// Variance retained by PCA [default: 0.95]
    #[arg(long)]
    pub variance_fraction: Option<f64>,
    /// SVM C candidates [default: 0.1,1,10,100]
    #[arg(long, value_delimiter = ',')]
    pub c_grid: Option<Vec<f64>>,
    /// Exponents j for gamma = 2^j / dim [default: -2,-1,0,1,2]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub gamma_exponents: Option<Vec<i32>>,
    /// Cross-validation folds [default: 5]
    #[arg(long)]
    pub folds: Option<usize>,
}

impl PipelineArgs {
    pub fn config(&self, seed: u64) -> PipelineConfig {
        let d = PipelineConfig::default();
        PipelineConfig {
            q_grid: self.q_grid.clone().unwrap_or(d.q_grid),
            bins: self.bins.unwrap_or(d.bins),
            variance_fraction: self.variance_fraction.unwrap_or(d.variance_fraction),
            c_grid: self.c_grid.clone().unwrap_or(d.c_grid),
            gamma_exponents: self.gamma_exponents.clone().unwrap_or(d.gamma_exponents),
            folds: self.folds.unwrap_or(d.folds),
            seed,
            ..d
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Family spec (JSON)
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub count: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Samples per trace
    #[arg(long, default_value_t = 4096)]
    pub length: usize,
    #[arg(long)]
    pub out_dir: PathBuf,
}

fn read_spec(path: &Path) -> Result<FamilySpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading spec {}", path.display()))?;
    FamilySpec::from_json(&text).with_context(|| format!("invalid spec {}", path.display()))
}

fn family_name(spec: &FamilySpec, path: &Path) -> String {
    spec.family
        .clone()
        .or_else(|| path.file_stem().map(|s| s.to_string_lossy().into_owned()))
        .unwrap_or_else(|| "family".into())
}

/// Writes `<family>_<seed>.csv` for each seed and returns the paths.
pub fn synth(args: &SynthArgs) -> Result<Vec<PathBuf>> {
    let spec = read_spec(&args.spec)?;
    let family = family_name(&spec, &args.spec);
    fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    let mut written = Vec::new();
    for seed in args.seed..args.seed + args.count {
        let trace = generate_synthetic_trace(&spec, seed, args.length)?;
        let path = args.out_dir.join(format!("{family}_{seed}.csv"));
        fs::write(&path, write_trace(&trace)).with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
    }
    log::info!(
        "wrote {} traces of family {family} to {}",
        written.len(),
        args.out_dir.display()
    );
    Ok(written)
}

#[derive(Debug, Clone, Args)]
pub struct CollectArgs {
    /// Rule file (JSON list); the built-in 26-metric Linux rules when omitted
    #[arg(long)]
    pub rules: Option<PathBuf>,
    /// Root of the proc-style tree
    #[arg(long, default_value = "/proc")]
    pub root: PathBuf,
    /// Process id substituted for `{pid}` in rule paths
    #[arg(long)]
    pub pid: Option<u32>,
    /// Metric order of the output; rule order when omitted
    #[arg(long, value_delimiter = ',')]
    pub schema: Option<Vec<String>>,
    /// Sampling interval in seconds
    #[arg(long, default_value_t = 0.25)]
    pub interval: f64,
    /// Collection length in seconds
    #[arg(long, conflicts_with = "samples", required_unless_present = "samples")]
    pub duration: Option<f64>,
    /// Number of samples
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn collect_cmd(args: &CollectArgs) -> Result<()> {
    let rules = match &args.rules {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading rule file {}", path.display()))?;
            parse_rules(&text).with_context(|| format!("rule file {}", path.display()))?
        }
        None => default_rules(),
    };
    let spec = ProcSourceSpec::new(&args.root, rules, args.pid);
    let schema = match &args.schema {
        Some(names) => MetricSchema::new(names.clone())?,
        None => spec.schema()?,
    };
    let bound = match (args.samples, args.duration) {
        (Some(n), _) => SampleBound::Samples(n),
        (None, Some(d)) => SampleBound::Duration(d),
        (None, None) => bail!("give --duration or --samples"),
    };
    let config = SamplerConfig {
        sampling_interval: args.interval,
        bound,
        schema,
    };
    let meta = collect(&spec, &config, &args.out)?;
    log::info!(
        "wrote {} samples to {} (max jitter {:.1} ms)",
        meta.samples,
        args.out.display(),
        meta.max_jitter_s * 1e3
    );
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct FingerprintArgs {
    pub trace: PathBuf,
    #[command(flatten)]
    pub dfa: DfaArgs,
}

pub fn fingerprint_cmd(args: &FingerprintArgs) -> Result<String> {
    let trace = load_trace(&args.trace, None)?;
    let fv = fingerprint(&trace, &args.dfa.config()?)?;
    for name in fv.degenerate() {
        log::warn!("{}: degenerate feature {name}", args.trace.display());
    }
    Ok(fv.to_csv())
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    /// CSV of `path,family` rows
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub model_out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[command(flatten)]
    pub dfa: DfaArgs,
}

pub fn train(args: &TrainArgs) -> Result<String> {
    let dfa = args.dfa.config()?;
    let entries = read_manifest(&args.manifest)?;
    let (schema, fps) = fingerprint_entries(&entries, &dfa)?;
    let dataset: Vec<_> = fps.into_iter().zip(entries.iter().map(|e| e.family.clone())).collect();
    let pipeline = train_pipeline(&dataset, &args.pipeline.config(args.seed))?;
    let meta = &pipeline.metadata;
    let mut report = String::from("q,features,dim,cv_accuracy,c,gamma\n");
    for c in &meta.candidates {
        writeln!(
            report,
            "{},{},{},{},{},{}",
            c.q, c.features, c.dim, c.cv_accuracy, c.c, c.gamma
        )?;
    }
    writeln!(
        report,
        "chosen q={} c={} gamma={} cv_accuracy={}",
        meta.chosen_q, meta.params.c, meta.params.gamma, meta.cv_accuracy
    )?;
    let model = ModelFile::new(schema, dfa, pipeline);
    fs::write(&args.model_out, model.to_json()).with_context(|| format!("writing {}", args.model_out.display()))?;
    Ok(report)
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(required = true)]
    pub traces: Vec<PathBuf>,
}

pub fn load_model(path: &Path) -> Result<ModelFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading model {}", path.display()))?;
    ModelFile::from_json(&text).with_context(|| format!("loading model {}", path.display()))
}

/// One `trace,family,votes` row per trace; votes as `class:count` joined by `;`.
pub fn classify(args: &ClassifyArgs) -> Result<String> {
    let model = load_model(&args.model)?;
    let mut out = String::from("trace,family,votes\n");
    for path in &args.traces {
        let trace = load_trace(path, None)?;
        let p = model
            .classify_trace(&trace)
            .with_context(|| format!("classifying {}", path.display()))?;
        let votes: Vec<String> = model
            .pipeline
            .classes()
            .iter()
            .zip(&p.votes)
            .map(|(c, v)| format!("{c}:{v}"))
            .collect();
        writeln!(out, "{},{},{}", path.display(), p.label, votes.join(";"))?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    /// CSV of `path,family[,sample]` rows
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub repetitions: usize,
    #[arg(long, default_value_t = 0.7)]
    pub train_fraction: f64,
    /// Runs per sample when the manifest has no sample column
    #[arg(long, default_value_t = 2)]
    pub q_runs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[command(flatten)]
    pub dfa: DfaArgs,
}

pub fn evaluate(args: &EvaluateArgs) -> Result<String> {
    let dfa = args.dfa.config()?;
    let entries = read_manifest(&args.manifest)?;
    let (_, fps) = fingerprint_entries(&entries, &dfa)?;
    let samples = group_samples(&entries, fps, args.q_runs)?;
    log::info!("{} samples from {} traces", samples.len(), entries.len());
    let config = HoldoutConfig {
        repetitions: args.repetitions,
        train_fraction: args.train_fraction,
        seed: args.seed,
        pipeline: args.pipeline.config(args.seed),
    };
    let report = repeated_holdout(&samples, &config)?;
    fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    let files = [
        ("report.json", serde_json::to_string_pretty(&report)? + "\n"),
        ("confusion.csv", report.confusion_csv()),
        ("precision_recall.csv", report.precision_recall_csv()),
        ("repetitions.csv", report.repetitions_csv()),
    ];
    for (name, body) in files {
        let path = args.out_dir.join(name);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(format!(
        "mean accuracy {} std {} over {} repetitions\n",
        report.mean_accuracy, report.std_accuracy, args.repetitions
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StabilityMode {
    /// Exponent spread over repeated runs at one length
    Box,
    /// Exponent spread as a function of trace length
    Sweep,
}

#[derive(Debug, Clone, Args)]
pub struct StabilityArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, value_enum, default_value_t = StabilityMode::Box)]
    pub mode: StabilityMode,
    /// Runs in box mode
    #[arg(long, default_value_t = 30)]
    pub runs: usize,
    /// Trace length in box mode
    #[arg(long, default_value_t = 8192)]
    pub length: usize,
    /// Trace lengths in sweep mode
    #[arg(long, value_delimiter = ',', default_value = "512,1024,2048,4096,8192,16384")]
    pub lengths: Vec<usize>,
    /// Runs per length in sweep mode
    #[arg(long, default_value_t = 5)]
    pub runs_per_length: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub dfa: DfaArgs,
}

/// Box mode writes `box.csv` and `alphas.csv`; sweep mode writes `sweep.csv`.
pub fn stability(args: &StabilityArgs) -> Result<Vec<PathBuf>> {
    let spec = read_spec(&args.spec)?;
    let dfa = args.dfa.config()?;
    fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    let files = match args.mode {
        StabilityMode::Box => {
            let report = dfa_stability_report(&spec, args.runs, args.length, &dfa, args.seed)?;
            let mut alphas = format!("run,{}\n", report.metrics.join(","));
            for r in 0..args.runs {
                let row: Vec<String> = report.alphas.iter().map(|a| a[r].to_string()).collect();
                writeln!(alphas, "{r},{}", row.join(","))?;
            }
            vec![("box.csv", report.to_csv()), ("alphas.csv", alphas)]
        }
        StabilityMode::Sweep => {
            let rows = dfa_length_sweep(&spec, &args.lengths, args.runs_per_length, &dfa, args.seed)?;
            vec![("sweep.csv", sweep_csv(&rows))]
        }
    };
    let mut written = Vec::new();
    for (name, body) in files {
        let path = args.out_dir.join(name);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
    }
    Ok(written)
}

pub fn print_stdout(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}
