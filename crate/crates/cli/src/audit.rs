//! End-to-end RIP audit: restricted isometry constant, dependency graphs,
//! equitable partitions, the row-block decomposition and the probability
//! bounds, for each requested kind.

use anyhow::{bail, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};
use stcs_core::randgen::sample_subset;
use stcs_core::riplab::{
    block_rip_chain, colex_unrank, dependency_graph, equitable_coloring, n_choose_k, q_for, rip_exact,
    rip_monte_carlo, theory_bounds, verify_decomposition, verify_partition, BlockChainReport, PartitionCertificate,
    RipOptions, RipReport, TheoryBounds, TheoryParams,
};
use stcs_core::{DistributionSpec, MeasurementOperator, OperatorKind, SeedSpec};

use crate::config::ExperimentConfig;
use crate::run::{cell_seed, json_pretty, pool, prepare_dir, table_csv, write_file, Purpose, CSV_SCHEMA};

/// Column subsets examined by the lemma checks when enumerating all of
/// them would exceed this count and no sample size is configured.
pub const DEFAULT_SUBSET_SAMPLE: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaAudit {
    pub subsets_checked: usize,
    pub exhaustive: bool,
    pub q: usize,
    pub degree_bound: usize,
    pub max_degree: usize,
    pub degree_violations: usize,
    pub partitions_verified: usize,
    pub partition_failures: usize,
    /// Certificate for the partition of the worst RIP subset.
    pub witness_partition: PartitionCertificate,
    pub decomposition_probes: usize,
    pub max_decomposition_residual: f64,
    pub decomposition_passed: bool,
    pub block_chain: BlockChainReport,
}

impl LemmaAudit {
    pub fn passed(&self) -> bool {
        self.degree_violations == 0
            && self.partition_failures == 0
            && self.decomposition_passed
            && self.block_chain.implication_holds
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub matrix_kind: OperatorKind,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub s: usize,
    pub rip: RipReport,
    /// Absent for kinds without a generator dependency structure.
    pub lemma: Option<LemmaAudit>,
    pub theory: TheoryBounds,
    pub chain_passed: bool,
}

fn subsets(n: usize, s: usize, cap: usize, seed: SeedSpec) -> (Vec<Vec<usize>>, bool) {
    let total = n_choose_k(n, s);
    if total <= cap as u128 {
        ((0..total).map(|r| colex_unrank(r, s)).collect(), true)
    } else {
        let mut rng = seed.rng();
        let picks = (0..cap)
            .map(|_| {
                let mut t = sample_subset(&mut rng, n, s);
                t.sort_unstable();
                t
            })
            .collect();
        (picks, false)
    }
}

fn lemma_audit(
    op: &MeasurementOperator,
    m: usize,
    rip: &RipReport,
    cap: usize,
    probes: usize,
    seed: SeedSpec,
) -> Result<LemmaAudit> {
    let s = 3 * m;
    let q = q_for(m);
    let (list, exhaustive) = subsets(op.n(), s, cap, seed.derive(&[0]));
    let mut rng = seed.derive(&[1]).rng();
    let mut max_degree = 0;
    let mut degree_violations = 0;
    let mut partitions_verified = 0;
    let mut partition_failures = 0;
    let mut max_res: f64 = 0.0;
    let mut decomposition_passed = true;
    for t in &list {
        let dep = dependency_graph(op, t)?;
        max_degree = max_degree.max(dep.max_degree);
        degree_violations += usize::from(!dep.bound_holds);
        let part = equitable_coloring(&dep.graph, q)?;
        match verify_partition(&dep.graph, &part) {
            Ok(_) => partitions_verified += 1,
            Err(_) => partition_failures += 1,
        }
        let xs: Vec<Vec<f64>> = (0..probes).map(|_| (0..s).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let rep = verify_decomposition(op, t, &part, &xs)?;
        max_res = max_res.max(rep.max_rel_residual_blocks).max(rep.max_rel_residual_rescaled);
        decomposition_passed &= rep.passed;
    }
    let dep = dependency_graph(op, &rip.witness_subset)?;
    let part = equitable_coloring(&dep.graph, q)?;
    let witness_partition = verify_partition(&dep.graph, &part)?;
    let block_chain = block_rip_chain(op, &rip.witness_subset, &part)?;
    Ok(LemmaAudit {
        subsets_checked: list.len(),
        exhaustive,
        q,
        degree_bound: q - 1,
        max_degree,
        degree_violations,
        partitions_verified,
        partition_failures,
        witness_partition,
        decomposition_probes: probes,
        max_decomposition_residual: max_res,
        decomposition_passed,
        block_chain,
    })
}

/// Audits one operator at sparsity `m` (order `s = 3m`). Exact enumeration
/// is used within the subset budget; beyond it `monte_carlo` trials are
/// required.
pub fn audit_operator(
    op: &MeasurementOperator,
    m: usize,
    delta: f64,
    monte_carlo: Option<usize>,
    probes: usize,
    seed: SeedSpec,
) -> Result<AuditReport> {
    let s = 3 * m;
    let (n, k) = (op.n(), op.k());
    if s > n {
        bail!("order 3m = {s} exceeds n = {n}");
    }
    let opts = RipOptions::default();
    let rip = if n_choose_k(n, s) <= opts.budget {
        rip_exact(op, s, opts)?
    } else if let Some(trials) = monte_carlo {
        rip_monte_carlo(op, s, trials, seed.derive(&[2]))?
    } else {
        bail!("C({n}, {s}) subsets exceed the exact budget of {}; pass --monte-carlo <trials>", opts.budget);
    };
    let lemma = if op.kind().is_symmetric() && !op.composes_d() {
        let cap = monte_carlo.unwrap_or(DEFAULT_SUBSET_SAMPLE);
        Some(lemma_audit(op, m, &rip, cap, probes, seed.derive(&[3]))?)
    } else {
        None
    };
    let theory = theory_bounds(TheoryParams::new(n, m, k, delta))?;
    let chain_passed = lemma.as_ref().is_none_or(LemmaAudit::passed);
    Ok(AuditReport { matrix_kind: op.kind(), n, k, m, s, rip, lemma, theory, chain_passed })
}

pub fn run_rip_audit(cfg: &ExperimentConfig) -> Result<Vec<AuditReport>> {
    cfg.validate()?;
    pool(cfg)?.install(|| {
        let mut out = Vec::new();
        for &kind in &cfg.matrix_kinds {
            for &k in &cfg.k_grid {
                let dist = DistributionSpec::new(cfg.dist, k)?;
                let op = MeasurementOperator::random(kind, k, cfg.n, dist, cell_seed(cfg, kind, k, 0, Purpose::Operator))?;
                let seed = cell_seed(cfg, kind, k, 0, Purpose::Signal);
                out.push(audit_operator(&op, cfg.m, cfg.delta, cfg.monte_carlo, cfg.probes, seed)?);
            }
        }
        Ok(out)
    })
}

pub fn audit_csv(reports: &[AuditReport]) -> Result<String> {
    table_csv(
        &[
            "matrix_kind",
            "n",
            "k",
            "s",
            "rip_mode",
            "delta_s",
            "max_degree",
            "degree_bound",
            "partition_failures",
            "max_decomposition_residual",
            "union_bound",
            "chain_passed",
        ],
        reports.iter().map(|r| {
            let opt = |v: Option<String>| v.unwrap_or_default();
            vec![
                r.matrix_kind.to_string(),
                r.n.to_string(),
                r.k.to_string(),
                r.s.to_string(),
                match r.rip.mode {
                    stcs_core::riplab::RipMode::Exact => "exact".to_string(),
                    stcs_core::riplab::RipMode::MonteCarlo { trials } => format!("monte_carlo:{trials}"),
                },
                format!("{:?}", r.rip.delta),
                opt(r.lemma.as_ref().map(|l| l.max_degree.to_string())),
                opt(r.lemma.as_ref().map(|l| l.degree_bound.to_string())),
                opt(r.lemma.as_ref().map(|l| l.partition_failures.to_string())),
                opt(r.lemma.as_ref().map(|l| format!("{:?}", l.max_decomposition_residual))),
                format!("{:?}", r.theory.union.raw),
                r.chain_passed.to_string(),
            ]
        }),
    )
}

#[derive(Serialize)]
struct Summary<'a> {
    schema: &'a str,
    experiment: &'a str,
    reports: &'a [AuditReport],
}

pub fn write_audit_outputs(cfg: &ExperimentConfig, reports: &[AuditReport]) -> Result<()> {
    prepare_dir(cfg)?;
    let dir = &cfg.output_dir;
    write_file(dir, "results.csv", audit_csv(reports)?)?;
    let summary = Summary { schema: CSV_SCHEMA, experiment: cfg.experiment.name(), reports };
    write_file(dir, "results.json", json_pretty(&summary)?)
}
