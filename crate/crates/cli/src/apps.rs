//! System identification and piecewise-constant recovery runs.

use anyhow::Result;
use rayon::prelude::*;
use stcs_core::pipelines::{convolve_and_measure, identify_system, make_probe, make_pwc, recover_pwc};
use stcs_core::randgen::draw_rademacher_spikes;
use stcs_core::recovery::{judge_success, relative_error};
use stcs_core::{DistributionSpec, MeasurementOperator, OperatorKind, SparseSignal};

use crate::config::ExperimentConfig;
use crate::run::{cell_seed, pool, timed, Purpose, ResultRow, TrialOutcome};

const KIND: OperatorKind = OperatorKind::SymToeplitz;

/// Symmetric probe of free length `n`, `m`-spike impulse response, `k`
/// convolution samples.
pub fn sysid_trial(cfg: &ExperimentConfig, k: usize, trial: usize) -> Result<TrialOutcome> {
    let dist = DistributionSpec::new(cfg.dist, k)?;
    let probe = make_probe(cfg.n, k, dist, cell_seed(cfg, KIND, k, trial, Purpose::Operator))?;
    let x = draw_rademacher_spikes(cfg.n, cfg.m, cell_seed(cfg, KIND, k, trial, Purpose::Signal))?;
    let y = convolve_and_measure(&probe, &x)?;
    let (res, seconds) = timed(|| identify_system(&probe, &y, &cfg.solver));
    let res = res?;
    Ok(TrialOutcome {
        relative_error: relative_error(&x, &res.x_hat)?,
        success: judge_success(&x, &res.x_hat, cfg.solver.success_rel_tol)?,
        seconds,
    })
}

/// `m`-piece signal measured through `A D`, recovered and integrated.
/// Success is judged on the signal, not on its jumps.
pub fn pwc_trial(cfg: &ExperimentConfig, k: usize, trial: usize) -> Result<TrialOutcome> {
    let dist = DistributionSpec::new(cfg.dist, k)?;
    let a = MeasurementOperator::random(KIND, k, cfg.n, dist, cell_seed(cfg, KIND, k, trial, Purpose::Operator))?;
    let al = a.compose_with_d();
    let s = make_pwc(cfg.n, cfg.m, cell_seed(cfg, KIND, k, trial, Purpose::Signal))?;
    let y = al.apply(&s.x)?;
    let (rec, seconds) = timed(|| recover_pwc(&al, &y, &cfg.solver));
    let rec = rec?;
    let truth = SparseSignal::from_dense(&s.x);
    Ok(TrialOutcome {
        relative_error: relative_error(&truth, &rec.x_hat)?,
        success: judge_success(&truth, &rec.x_hat, cfg.solver.success_rel_tol)?,
        seconds,
    })
}

fn run_cells(
    cfg: &ExperimentConfig,
    trial: fn(&ExperimentConfig, usize, usize) -> Result<TrialOutcome>,
) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let tasks: Vec<(usize, usize)> = cfg.k_grid.iter().flat_map(|&k| (0..cfg.trials).map(move |t| (k, t))).collect();
    let outcomes: Vec<TrialOutcome> =
        pool(cfg)?.install(|| tasks.par_iter().map(|&(k, t)| trial(cfg, k, t)).collect::<Result<_>>())?;
    Ok(cfg
        .k_grid
        .iter()
        .zip(outcomes.chunks(cfg.trials))
        .map(|(&k, o)| ResultRow::aggregate(KIND, k, o))
        .collect())
}

pub fn run_sysid(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    run_cells(cfg, sysid_trial)
}

pub fn run_pwc(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    run_cells(cfg, pwc_trial)
}
