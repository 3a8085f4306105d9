//! Acceptance suite: one `[PASS]`/`[FAIL]` line per criterion, nonzero exit
//! if any criterion fails.

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rcfp::classifier::{kernel_matrix, solve_dual, train_pipeline, PipelineConfig, SvmParams};
use rcfp::collector::{default_rules, default_schema, MetricKind};
use rcfp::features::dfa_exponent;
use rcfp::selection::{mutual_information, q_subset, MiRanking, Pca};
use rcfp::stats::mean;
use rcfp::synth::{generate_synthetic_trace, FamilySpec};
use rcfp::{fingerprint, parse_trace, write_trace, DfaConfig, FamilyLabel, FeatureVector, MetricSchema, Trace};
use rcfp_cli::ModelFile;

#[path = "../../core/tests/support/proc_tree.rs"]
mod proc_tree;
#[path = "../../core/tests/support/qp.rs"]
mod qp;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn rcfp(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_rcfp"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "rcfp {}: {}",
            args[0],
            String::from_utf8_lossy(&out.stderr).trim()
        ));
    }
    String::from_utf8(out.stdout).map_err(|e| e.to_string())
}

fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 temp path")
}

fn tempdir() -> tempfile::TempDir {
    tempfile::tempdir().expect("temp dir")
}

fn write_spec(dir: &Path, spec: &FamilySpec) -> PathBuf {
    let name = spec.family.clone().unwrap_or_else(|| "spec".into());
    let path = dir.join(format!("{name}.json"));
    fs::write(&path, serde_json::to_string_pretty(spec).unwrap()).unwrap();
    path
}

fn white(seed: u64, len: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// 26 metrics with exponents spread over [0.4, 1.6] and two correlated pairs.
fn reference_spec() -> FamilySpec {
    let alphas = (0..26).map(|m| 0.4 + 0.3 * (m % 5) as f64).collect();
    let mut spec = FamilySpec::independent(alphas);
    spec.family = Some("reference".into());
    for (i, j, r) in [(0, 1, 0.8), (2, 7, -0.5)] {
        spec.correlation[i][j] = r;
        spec.correlation[j][i] = r;
    }
    spec
}

fn dfa_canonical() -> Check {
    let cfg = DfaConfig::default();
    let (mut w, mut b, mut pink) = (Vec::new(), Vec::new(), Vec::new());
    let pink_spec = FamilySpec::independent(vec![1.0, 1.0]);
    for seed in 0..50 {
        let x = white(seed, 8192);
        w.push(dfa_exponent(&x, &cfg).map_err(|e| e.to_string())?.alpha);
        let walk: Vec<f64> = x
            .iter()
            .scan(0.0, |acc, v| {
                *acc += v;
                Some(*acc)
            })
            .collect();
        b.push(dfa_exponent(&walk, &cfg).map_err(|e| e.to_string())?.alpha);
        let t = generate_synthetic_trace(&pink_spec, 1000 + seed, 8192).map_err(|e| e.to_string())?;
        pink.push(
            dfa_exponent(t.metric(0).values(), &cfg)
                .map_err(|e| e.to_string())?
                .alpha,
        );
    }
    let (mw, mb, mp) = (mean(&w), mean(&b), mean(&pink));
    let detail = format!("white {mw:.4}, brownian {mb:.4}, 1/f {mp:.4}");
    ensure((mw - 0.5).abs() <= 0.03, format!("white noise off: {detail}"))?;
    ensure((mb - 1.5).abs() <= 0.07, format!("brownian off: {detail}"))?;
    ensure((mp - 1.0).abs() <= 0.07, format!("1/f off: {detail}"))?;
    Ok(detail)
}

fn dfa_stability() -> Check {
    let dir = tempdir();
    let spec = write_spec(dir.path(), &reference_spec());
    let out = dir.path().join("box");
    rcfp(&[
        "stability",
        "--spec",
        p(&spec),
        "--runs",
        "30",
        "--length",
        "8192",
        "--seed",
        "1",
        "--out-dir",
        p(&out),
    ])?;
    let csv = fs::read_to_string(out.join("box.csv")).map_err(|e| e.to_string())?;
    let iqrs: Vec<(String, f64)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[6].parse().unwrap())
        })
        .collect();
    ensure(iqrs.len() == 26, format!("{} metrics in box.csv", iqrs.len()))?;
    let worst = iqrs.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    ensure(worst.1 < 0.15, format!("IQR of {} is {:.4}", worst.0, worst.1))?;
    Ok(format!(
        "max IQR {:.4} ({}) over 26 metrics x 30 runs",
        worst.1, worst.0
    ))
}

fn length_sweep() -> Check {
    let dir = tempdir();
    let spec = write_spec(dir.path(), &reference_spec());
    let out = dir.path().join("sweep");
    rcfp(&[
        "stability",
        "--spec",
        p(&spec),
        "--mode",
        "sweep",
        "--lengths",
        "512,16384",
        "--runs-per-length",
        "5",
        "--seed",
        "2",
        "--out-dir",
        p(&out),
    ])?;
    let csv = fs::read_to_string(out.join("sweep.csv")).map_err(|e| e.to_string())?;
    let rows: Vec<(usize, f64)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[1].parse().unwrap(), f[3].parse().unwrap())
        })
        .collect();
    let avg = |len: usize| mean(&rows.iter().filter(|r| r.0 == len).map(|r| r.1).collect::<Vec<_>>());
    let (short, long) = (avg(512), avg(16384));
    ensure(
        long < short,
        format!("std at 16384 {long:.4} not below std at 512 {short:.4}"),
    )?;
    Ok(format!("mean std of alpha: T=512 {short:.4}, T=16384 {long:.4}"))
}

fn dimensionality() -> Check {
    let spec = FamilySpec::independent(vec![0.8; 26]);
    let t = generate_synthetic_trace(&spec, 5, 1024).map_err(|e| e.to_string())?;
    let fv = fingerprint(&t, &DfaConfig::default()).map_err(|e| e.to_string())?;
    let dfa = fv.names().iter().filter(|n| n.starts_with("dfa:")).count();
    let corr = fv.names().iter().filter(|n| n.starts_with("corr:")).count();
    ensure(
        (fv.len(), dfa, corr) == (351, 26, 325),
        format!("{} features ({dfa} dfa, {corr} corr)", fv.len()),
    )?;

    let dir = tempdir();
    let path = dir.path().join("t.csv");
    fs::write(&path, write_trace(&t)).unwrap();
    let cli = FeatureVector::from_csv(&rcfp(&["fingerprint", p(&path)])?).map_err(|e| e.to_string())?;
    ensure(cli.len() == 351, format!("CLI printed {} features", cli.len()))?;
    Ok("351 features = 26 dfa + 325 corr (library and CLI)".into())
}

fn svm_optimality() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let instances = 120;
    for k in 0..instances {
        let (x, y, params) = qp::random_problem(&mut rng);
        let kmat = kernel_matrix(&x, params.gamma);
        let sol = solve_dual(&kmat, &y, &params).map_err(|e| e.to_string())?;
        let oracle = qp::qp_oracle(&kmat, &y, params.c);
        let rel = (sol.objective() - oracle).abs() / oracle.abs().max(1e-12);
        worst = worst.max(rel);
        ensure(rel < 1e-4, format!("instance {k}: relative gap {rel:.2e}"))?;
        qp::kkt_check(&x, &y, &params).map_err(|e| format!("instance {k}: {e}"))?;
    }
    let mut models = instances;
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..80)
            .map(|i| {
                let shift = if i % 2 == 0 { 1.0 } else { -1.0 };
                let (a, b): (f64, f64) = (StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
                vec![shift + a, b]
            })
            .collect();
        let y: Vec<f64> = (0..80).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        for c in [0.1, 1.0, 10.0, 100.0] {
            qp::kkt_check(&x, &y, &SvmParams::new(c, 0.5)).map_err(|e| format!("blob seed {seed} C={c}: {e}"))?;
            models += 1;
        }
    }
    Ok(format!(
        "{instances} QP instances, worst relative gap {worst:.2e}; KKT held on {models} models"
    ))
}

fn selection_analytics() -> Check {
    let labels: Vec<FamilyLabel> = (0..200)
        .map(|i| FamilyLabel::new(if i % 2 == 0 { "a" } else { "b" }))
        .collect();
    let x: Vec<f64> = (0..200).map(|i| (i % 2) as f64).collect();
    let mi = mutual_information(&x, &labels, 10).map_err(|e| e.to_string())?;
    ensure((mi - 2f64.ln()).abs() < 1e-9, format!("MI {mi} vs ln 2"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        let n = rng.random_range(1..60);
        let values: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
        let ranking = MiRanking::from_values((0..n).map(|i| format!("f{i}")).collect(), values);
        let mut prev: Vec<usize> = Vec::new();
        for q in 1..=100 {
            let cur = q_subset(&ranking, q).map_err(|e| e.to_string())?;
            ensure(
                prev.iter().all(|i| cur.contains(i)),
                format!("q_subset({q}) drops features of q_subset({})", q - 1),
            )?;
            prev = cur;
        }
    }

    let mut worst_orth: f64 = 0.0;
    let mut worst_rec: f64 = 0.0;
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|_| (0..8).map(|j| rng.random_range(-1.0..1.0) * (j + 1) as f64).collect())
            .collect();
        let pca = Pca::fit(&rows, 1.0).map_err(|e| e.to_string())?;
        for i in 0..8 {
            for j in 0..8 {
                let d: f64 = pca.components[i]
                    .iter()
                    .zip(&pca.components[j])
                    .map(|(a, b)| a * b)
                    .sum();
                worst_orth = worst_orth.max((d - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        for r in &rows {
            let back = pca.reconstruct(&pca.transform(r).map_err(|e| e.to_string())?);
            for (a, b) in back.iter().zip(r) {
                worst_rec = worst_rec.max((a - b).abs());
            }
        }
    }
    ensure(worst_orth < 1e-8, format!("orthonormality error {worst_orth:.2e}"))?;
    ensure(worst_rec < 1e-8, format!("reconstruction error {worst_rec:.2e}"))?;
    Ok(format!(
        "MI error {:.1e}; q_subset monotone; PCA orthonormality {worst_orth:.1e}, reconstruction {worst_rec:.1e}",
        (mi - 2f64.ln()).abs()
    ))
}

/// Five families over 26 metrics. Family f uses exponent level (f + m) mod 5
/// on metric m, so any two families differ by at least 0.3 on every metric,
/// and each family correlates its own two metric pairs.
fn desk_families() -> Vec<FamilySpec> {
    (0..5)
        .map(|f| {
            let alphas = (0..26).map(|m| 0.4 + 0.3 * ((f + m) % 5) as f64).collect();
            let mut spec = FamilySpec::independent(alphas);
            spec.family = Some(format!("family{f}"));
            for pair in 0..2 {
                let i = 5 * f + 2 * pair;
                spec.correlation[i][i + 1] = 0.7;
                spec.correlation[i + 1][i] = 0.7;
            }
            spec
        })
        .collect()
}

fn desk_classification() -> Check {
    let specs = desk_families();
    for (a, sa) in specs.iter().enumerate() {
        for sb in &specs[a + 1..] {
            let separated = sa
                .alpha_targets
                .iter()
                .zip(&sb.alpha_targets)
                .filter(|(x, y)| (*x - *y).abs() >= 0.3 - 1e-12)
                .count();
            ensure(separated >= 6, "family construction not separated")?;
            ensure(sa.correlation != sb.correlation, "correlation templates coincide")?;
        }
    }
    let dir = tempdir();
    let traces = dir.path().join("traces");
    let mut manifest = String::from("path,family\n");
    for spec in &specs {
        let name = spec.family.clone().unwrap();
        let spec_path = write_spec(dir.path(), spec);
        rcfp(&[
            "synth",
            "--spec",
            p(&spec_path),
            "--count",
            "80",
            "--seed",
            "0",
            "--length",
            "4096",
            "--out-dir",
            p(&traces),
        ])?;
        for seed in 0..80 {
            manifest.push_str(&format!("traces/{name}_{seed}.csv,{name}\n"));
        }
    }
    let manifest_path = dir.path().join("manifest.csv");
    fs::write(&manifest_path, manifest).unwrap();
    let out = dir.path().join("eval");
    rcfp(&[
        "evaluate",
        "--manifest",
        p(&manifest_path),
        "--out-dir",
        p(&out),
        "--seed",
        "0",
    ])?;
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    let reps = report["repetitions"].as_array().map_or(0, Vec::len);
    let m = report["mean_accuracy"].as_f64().unwrap_or(f64::NAN);
    let s = report["std_accuracy"].as_f64().unwrap_or(f64::NAN);
    let detail = format!("5 families x 40 samples x 2 runs, {reps} repetitions: accuracy {m:.4} +- {s:.4}");
    ensure(reps == 20, format!("expected 20 repetitions: {detail}"))?;
    ensure(m >= 0.90 && s <= 0.05, detail.clone())?;
    Ok(detail)
}

fn same_bytes(a: &Path, b: &Path) -> Result<(), String> {
    let (x, y) = (
        fs::read(a).map_err(|e| e.to_string())?,
        fs::read(b).map_err(|e| e.to_string())?,
    );
    ensure(x == y, format!("{} and {} differ", a.display(), b.display()))
}

fn determinism() -> Check {
    let dir = tempdir();
    let d = dir.path();
    let specs: Vec<FamilySpec> = desk_families().into_iter().take(3).collect();
    let mut manifest = String::from("path,family\n");
    for run in ["r1", "r2"] {
        for spec in &specs {
            let spec_path = write_spec(d, spec);
            rcfp(&[
                "synth",
                "--spec",
                p(&spec_path),
                "--count",
                "12",
                "--seed",
                "40",
                "--length",
                "1024",
                "--out-dir",
                p(&d.join(run)),
            ])?;
        }
    }
    for spec in &specs {
        let name = spec.family.clone().unwrap();
        for seed in 40..52 {
            same_bytes(
                &d.join(format!("r1/{name}_{seed}.csv")),
                &d.join(format!("r2/{name}_{seed}.csv")),
            )?;
            manifest.push_str(&format!("r1/{name}_{seed}.csv,{name}\n"));
        }
    }
    let manifest_path = d.join("manifest.csv");
    fs::write(&manifest_path, manifest).unwrap();
    let trace = d.join("r1/family0_40.csv");
    ensure(
        rcfp(&["fingerprint", p(&trace)])? == rcfp(&["fingerprint", p(&trace)])?,
        "fingerprint output differs",
    )?;

    let small = [
        "--q-grid",
        "20,50",
        "--c-grid",
        "1,10",
        "--gamma-exponents",
        "-1,0",
        "--seed",
        "9",
    ];
    let mut trained = Vec::new();
    for m in ["m1.json", "m2.json"] {
        let out = rcfp(
            &[
                &["train", "--manifest", p(&manifest_path), "--model-out", p(&d.join(m))][..],
                &small,
            ]
            .concat(),
        )?;
        trained.push(out);
    }
    ensure(trained[0] == trained[1], "train report differs")?;
    same_bytes(&d.join("m1.json"), &d.join("m2.json"))?;
    let classify = || {
        rcfp(&[
            "classify",
            "--model",
            p(&d.join("m1.json")),
            p(&trace),
            p(&d.join("r1/family2_51.csv")),
        ])
    };
    ensure(classify()? == classify()?, "classify output differs")?;

    for e in ["e1", "e2"] {
        rcfp(
            &[
                &[
                    "evaluate",
                    "--manifest",
                    p(&manifest_path),
                    "--out-dir",
                    p(&d.join(e)),
                    "--repetitions",
                    "3",
                ][..],
                &small,
            ]
            .concat(),
        )?;
    }
    for f in [
        "report.json",
        "confusion.csv",
        "precision_recall.csv",
        "repetitions.csv",
    ] {
        same_bytes(&d.join("e1").join(f), &d.join("e2").join(f))?;
    }
    let spec_path = write_spec(d, &specs[0]);
    for s in ["s1", "s2"] {
        let out = p(&d.join(s)).to_string();
        rcfp(&[
            "stability",
            "--spec",
            p(&spec_path),
            "--runs",
            "5",
            "--length",
            "1024",
            "--seed",
            "3",
            "--out-dir",
            &out,
        ])?;
        rcfp(&[
            "stability",
            "--spec",
            p(&spec_path),
            "--mode",
            "sweep",
            "--lengths",
            "512,1024",
            "--runs-per-length",
            "3",
            "--out-dir",
            &out,
        ])?;
    }
    for f in ["box.csv", "alphas.csv", "sweep.csv"] {
        same_bytes(&d.join("s1").join(f), &d.join("s2").join(f))?;
    }
    let tree = d.join("proc");
    proc_tree::apply(&tree, &proc_tree::record(3, 1)[0]);
    for c in ["c1.csv", "c2.csv"] {
        rcfp(&[
            "collect",
            "--root",
            p(&tree),
            "--pid",
            &proc_tree::PID.to_string(),
            "--interval",
            "0.01",
            "--samples",
            "20",
            "--out",
            p(&d.join(c)),
        ])?;
    }
    same_bytes(&d.join("c1.csv"), &d.join("c2.csv"))?;

    // model save/load on random fingerprints
    let cfg = DfaConfig::default();
    let mut dataset = Vec::new();
    for spec in &specs {
        for seed in 0..10 {
            let t = generate_synthetic_trace(spec, seed, 512).map_err(|e| e.to_string())?;
            dataset.push((
                fingerprint(&t, &cfg).map_err(|e| e.to_string())?,
                FamilyLabel::new(spec.family.clone().unwrap()),
            ));
        }
    }
    let pipeline = train_pipeline(
        &dataset,
        &PipelineConfig {
            q_grid: vec![30, 50],
            ..PipelineConfig::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let model = ModelFile::new(MetricSchema::numbered(26).unwrap(), cfg, pipeline);
    let loaded = ModelFile::from_json(&model.to_json()).map_err(|e| e.to_string())?;
    let names = dataset[0].0.names().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for k in 0..100 {
        let values = names
            .iter()
            .map(|n| {
                if n.starts_with("dfa:") {
                    rng.random_range(0.2..1.8)
                } else {
                    rng.random_range(-1.0..1.0)
                }
            })
            .collect();
        let fv = FeatureVector::new(names.clone(), values).unwrap();
        let (a, b) = (
            model.pipeline.classify(&fv).unwrap(),
            loaded.pipeline.classify(&fv).unwrap(),
        );
        let bits = |m: &[f64]| m.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        ensure(
            a.label == b.label && a.votes == b.votes && bits(&a.margins) == bits(&b.margins),
            format!("fingerprint {k}: prediction changed after reload"),
        )?;
    }
    Ok("synth, fingerprint, train, classify, evaluate, stability, collect byte-identical; 100/100 reloaded predictions identical".into())
}

fn collector_fidelity() -> Check {
    let rec = proc_tree::record(11, 256);
    let a = proc_tree::replay(&rec);
    let b = proc_tree::replay(&rec);
    let bits = |rows: &[Vec<f64>]| rows.iter().flatten().map(|v| v.to_bits()).collect::<Vec<_>>();
    ensure(bits(&a) == bits(&b), "replayed value columns differ")?;
    let rules = default_rules();
    let counters: Vec<usize> = (0..rules.len())
        .filter(|&m| rules[m].kind == MetricKind::Counter)
        .collect();
    ensure(
        a.iter().all(|r| counters.iter().all(|&m| r[m] >= 0.0)),
        "negative counter delta",
    )?;

    let t = Trace::from_rows(default_schema(), &a, 0.25, "replay").map_err(|e| e.to_string())?;
    let parsed = parse_trace(&write_trace(&t), Some(&default_schema())).map_err(|e| e.to_string())?;
    let fv = fingerprint(&parsed, &DfaConfig::default()).map_err(|e| e.to_string())?;
    ensure(fv.len() == 351, format!("{} features", fv.len()))?;

    let dir = tempdir();
    let tree = dir.path().join("proc");
    proc_tree::apply(&tree, &rec[0]);
    let out = dir.path().join("t.csv");
    rcfp(&[
        "collect",
        "--root",
        p(&tree),
        "--pid",
        &proc_tree::PID.to_string(),
        "--interval",
        "0.01",
        "--samples",
        "64",
        "--out",
        p(&out),
    ])?;
    let text = fs::read_to_string(&out).map_err(|e| e.to_string())?;
    let collected = parse_trace(&text, Some(&default_schema())).map_err(|e| e.to_string())?;
    ensure(collected.len() == 64, format!("{} rows collected", collected.len()))?;
    FeatureVector::from_csv(&rcfp(&["fingerprint", p(&out)])?).map_err(|e| e.to_string())?;
    Ok(format!(
        "256-step replay bit-identical, {} counters non-negative, replay and collected traces parse and fingerprint",
        counters.len()
    ))
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Check,
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "DFA on canonical processes",
            budget: Some(Duration::from_secs(30)),
            run: dfa_canonical,
        },
        Criterion {
            id: 2,
            name: "DFA stability over 30 runs",
            budget: Some(Duration::from_secs(60)),
            run: dfa_stability,
        },
        Criterion {
            id: 3,
            name: "length sweep",
            budget: None,
            run: length_sweep,
        },
        Criterion {
            id: 4,
            name: "fingerprint dimensionality",
            budget: None,
            run: dimensionality,
        },
        Criterion {
            id: 5,
            name: "SVM optimality",
            budget: Some(Duration::from_secs(60)),
            run: svm_optimality,
        },
        Criterion {
            id: 6,
            name: "selection analytics",
            budget: None,
            run: selection_analytics,
        },
        Criterion {
            id: 7,
            name: "desk-scale classification",
            budget: Some(Duration::from_secs(30 * 60)),
            run: desk_classification,
        },
        Criterion {
            id: 8,
            name: "determinism",
            budget: None,
            run: determinism,
        },
        Criterion {
            id: 9,
            name: "collector fidelity",
            budget: None,
            run: collector_fidelity,
        },
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let elapsed = start.elapsed();
        let result = match (result, c.budget) {
            (Ok(_), Some(b)) if elapsed > b => {
                Err(format!("took {:.1} s, budget {} s", elapsed.as_secs_f64(), b.as_secs()))
            }
            (r, _) => r,
        };
        let (tag, detail) = match result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("[{tag}] {} {} ({:.1} s): {detail}", c.id, c.name, elapsed.as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
