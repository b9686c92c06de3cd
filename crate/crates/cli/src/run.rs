//! Pieces shared by every experiment: seeding, worker pools and output files.

use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use stcs_core::{OperatorKind, SeedSpec};

use crate::config::{Experiment, ExperimentConfig};

/// Version tag written as the first line of every results CSV.
pub const CSV_SCHEMA: &str = "stcs-results v1";

#[derive(Debug, Clone, Copy)]
pub enum Purpose {
    Operator = 0,
    Signal = 1,
}

fn experiment_code(e: Experiment) -> u64 {
    match e {
        Experiment::Sweep => 1,
        Experiment::Image => 2,
        Experiment::Sysid => 3,
        Experiment::Pwc => 4,
        Experiment::RipAudit => 5,
    }
}

pub fn kind_code(kind: OperatorKind) -> u64 {
    OperatorKind::ALL.iter().position(|&k| k == kind).unwrap() as u64
}

/// Stream for one (kind, k, trial) cell; depends on nothing else, so grid
/// order and scheduling cannot change any cell. Signals ignore the kind so
/// that every kind sees the same test signals.
pub fn cell_seed(cfg: &ExperimentConfig, kind: OperatorKind, k: usize, trial: usize, purpose: Purpose) -> SeedSpec {
    let kind = match purpose {
        Purpose::Operator => kind_code(kind),
        Purpose::Signal => u64::MAX,
    };
    SeedSpec::new(cfg.master_seed, 0).derive(&[
        experiment_code(cfg.experiment),
        kind,
        k as u64,
        trial as u64,
        purpose as u64,
    ])
}

pub fn pool(cfg: &ExperimentConfig) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.worker_count())
        .build()
        .context("building worker pool")
}

pub fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed().as_secs_f64())
}

/// One cell of a success-rate table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub matrix_kind: OperatorKind,
    pub k: usize,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_relative_error: f64,
    /// Wall clock; reported in `timings.csv` only.
    #[serde(skip)]
    pub mean_solve_seconds: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct TrialOutcome {
    pub relative_error: f64,
    pub success: bool,
    pub seconds: f64,
}

impl ResultRow {
    pub fn aggregate(matrix_kind: OperatorKind, k: usize, outcomes: &[TrialOutcome]) -> Self {
        let trials = outcomes.len();
        let successes = outcomes.iter().filter(|o| o.success).count();
        let mean = |f: fn(&TrialOutcome) -> f64| outcomes.iter().map(f).sum::<f64>() / trials as f64;
        Self {
            matrix_kind,
            k,
            trials,
            successes,
            success_rate: successes as f64 / trials as f64,
            mean_relative_error: mean(|o| o.relative_error),
            mean_solve_seconds: mean(|o| o.seconds),
        }
    }
}

pub fn rows_csv(rows: &[ResultRow]) -> Result<String> {
    table_csv(
        &["matrix_kind", "k", "trials", "successes", "success_rate", "mean_relative_error"],
        rows.iter().map(|r| {
            vec![
                r.matrix_kind.to_string(),
                r.k.to_string(),
                r.trials.to_string(),
                r.successes.to_string(),
                format!("{:?}", r.success_rate),
                format!("{:?}", r.mean_relative_error),
            ]
        }),
    )
}

pub fn timings_csv(rows: &[ResultRow]) -> Result<String> {
    table_csv(
        &["matrix_kind", "k", "mean_solve_seconds"],
        rows.iter().map(|r| vec![r.matrix_kind.to_string(), r.k.to_string(), format!("{:.6}", r.mean_solve_seconds)]),
    )
}

/// CSV with the schema comment and header line.
pub fn table_csv(header: &[&str], records: impl Iterator<Item = Vec<String>>) -> Result<String> {
    let mut out = format!("# {CSV_SCHEMA}: {}\n", header.join(",")).into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(header)?;
        for r in records {
            w.write_record(&r)?;
        }
        w.flush()?;
    }
    Ok(String::from_utf8(out)?)
}

pub fn write_file(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

pub fn prepare_dir(cfg: &ExperimentConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("creating {}", cfg.output_dir.display()))?;
    write_file(&cfg.output_dir, "run-config.json", serde_json::to_string_pretty(cfg)? + "\n")
}

pub fn json_pretty<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}
