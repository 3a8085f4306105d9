//! A recorded fake proc tree matching the default rule set. Shared by the
//! collector tests and the acceptance suite.
#![allow(dead_code)]

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rcfp::collector::{default_rules, default_schema, ProcSourceSpec, Sampler};

pub const PID: u32 = 4242;

/// One recorded state of a proc tree: relative path and file contents.
pub type Snapshot = Vec<(String, String)>;

/// Recording of `len` states of a tree matching the default rule set.
/// Counters only grow; gauges wander.
pub fn record(seed: u64, len: usize) -> Vec<Snapshot> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cpu = [1000u64; 5];
    let mut ctxt = 5000u64;
    let mut proc_ctr = [10u64; 4];
    let mut io = [0u64; 2];
    let mut net = [0u64; 4];
    (0..len)
        .map(|_| {
            for c in cpu.iter_mut() {
                *c += rng.random_range(0..40);
            }
            ctxt += rng.random_range(0..900);
            for c in proc_ctr.iter_mut() {
                *c += rng.random_range(0..6);
            }
            for c in io.iter_mut() {
                *c += rng.random_range(0..8192);
            }
            for c in net.iter_mut() {
                *c += rng.random_range(0..3000);
            }
            let g = |rng: &mut ChaCha8Rng, lo: u64, hi: u64| rng.random_range(lo..hi);
            let stat = format!(
                "cpu  {} {} {} {} {} 0 0 0 0 0\ncpu0 1 2 3 4 5 0 0 0 0 0\nctxt {}\nprocs_running {}\n",
                cpu[0],
                cpu[1],
                cpu[2],
                cpu[3],
                cpu[4],
                ctxt,
                g(&mut rng, 1, 9)
            );
            let meminfo = format!(
                "MemTotal: 8000000 kB\nMemFree: {} kB\nMemAvailable: {} kB\nBuffers: {} kB\nCached: {} kB\nSwapFree: {} kB\n",
                g(&mut rng, 1_000_000, 2_000_000),
                g(&mut rng, 3_000_000, 4_000_000),
                g(&mut rng, 10_000, 20_000),
                g(&mut rng, 500_000, 600_000),
                g(&mut rng, 100, 200)
            );
            let mut fields: Vec<String> = (0..44).map(|i| i.to_string()).collect();
            fields[0] = PID.to_string();
            fields[1] = "(app)".into();
            fields[2] = "S".into();
            fields[9] = proc_ctr[0].to_string();
            fields[11] = proc_ctr[1].to_string();
            fields[13] = proc_ctr[2].to_string();
            fields[14] = proc_ctr[3].to_string();
            fields[19] = g(&mut rng, 5, 30).to_string();
            fields[22] = g(&mut rng, 1 << 28, 1 << 29).to_string();
            fields[23] = g(&mut rng, 10_000, 20_000).to_string();
            let pstat = fields.join(" ") + "\n";
            let pio = format!("rchar: 1\nwchar: 2\nread_bytes: {}\nwrite_bytes: {}\n", io[0], io[1]);
            let dev = format!(
                "Inter-|   Receive\n face |bytes packets\n    lo: 1 2 0 0 0 0 0 0 3 4 0 0 0 0 0 0\n  eth0: {} {} 0 0 0 0 0 0 {} {} 0 0 0 0 0 0\n",
                net[0], net[1], net[2], net[3]
            );
            let sock = format!("sockets: used 100\nTCP: inuse {} orphan 0\n", g(&mut rng, 1, 50));
            vec![
                ("stat".into(), stat),
                ("meminfo".into(), meminfo),
                (format!("{PID}/stat"), pstat),
                (format!("{PID}/io"), pio),
                (format!("{PID}/net/dev"), dev),
                ("net/sockstat".into(), sock),
            ]
        })
        .collect()
}

pub fn apply(root: &Path, snap: &Snapshot) {
    for (rel, text) in snap {
        let p = root.join(rel);
        fs::create_dir_all(p.parent().unwrap()).unwrap();
        fs::write(p, text).unwrap();
    }
}

pub fn replay(recording: &[Snapshot]) -> Vec<Vec<f64>> {
    let dir = tempfile::tempdir().unwrap();
    let spec = ProcSourceSpec::new(dir.path(), default_rules(), Some(PID));
    let mut sampler = Sampler::new(&spec, &default_schema()).unwrap();
    recording
        .iter()
        .map(|snap| {
            apply(dir.path(), snap);
            sampler.sample_once().unwrap()
        })
        .collect()
}
