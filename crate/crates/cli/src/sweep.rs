//! Success rate against measurement count.

use anyhow::Result;
use rayon::prelude::*;
use serde::Serialize;
use stcs_core::randgen::draw_rademacher_spikes;
use stcs_core::recovery::{basis_pursuit, judge_success, relative_error};
use stcs_core::{DistributionSpec, MeasurementOperator, OperatorKind};

use crate::config::ExperimentConfig;
use crate::run::{cell_seed, json_pretty, pool, prepare_dir, rows_csv, timed, timings_csv, write_file, Purpose, ResultRow, TrialOutcome, CSV_SCHEMA};
use crate::svg::{line_chart, Series};

/// One trial: fresh operator, fresh +-1 spike signal, `y = A x`, basis
/// pursuit, success judged on relative error.
pub fn sweep_trial(cfg: &ExperimentConfig, kind: OperatorKind, k: usize, trial: usize) -> Result<TrialOutcome> {
    let dist = DistributionSpec::new(cfg.dist, k)?;
    let op = MeasurementOperator::random(kind, k, cfg.n, dist, cell_seed(cfg, kind, k, trial, Purpose::Operator))?;
    let x = draw_rademacher_spikes(cfg.n, cfg.m, cell_seed(cfg, kind, k, trial, Purpose::Signal))?;
    let y = op.apply(&x.to_dense())?;
    let (res, seconds) = timed(|| basis_pursuit(&op, &y, &cfg.solver));
    let res = res?;
    Ok(TrialOutcome {
        relative_error: relative_error(&x, &res.x_hat)?,
        success: judge_success(&x, &res.x_hat, cfg.solver.success_rel_tol)?,
        seconds,
    })
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let cells: Vec<(OperatorKind, usize)> =
        cfg.matrix_kinds.iter().flat_map(|&kind| cfg.k_grid.iter().map(move |&k| (kind, k))).collect();
    let tasks: Vec<(usize, usize)> = (0..cells.len()).flat_map(|c| (0..cfg.trials).map(move |t| (c, t))).collect();
    let outcomes: Vec<TrialOutcome> = pool(cfg)?.install(|| {
        tasks
            .par_iter()
            .map(|&(c, t)| sweep_trial(cfg, cells[c].0, cells[c].1, t))
            .collect::<Result<_>>()
    })?;
    Ok(cells
        .iter()
        .zip(outcomes.chunks(cfg.trials))
        .map(|(&(kind, k), o)| ResultRow::aggregate(kind, k, o))
        .collect())
}

pub fn success_chart(title: &str, rows: &[ResultRow]) -> String {
    let mut series: Vec<Series> = Vec::new();
    for r in rows {
        let label = r.matrix_kind.to_string();
        match series.iter_mut().find(|s| s.label == label) {
            Some(s) => s.points.push((r.k as f64, r.success_rate)),
            None => series.push(Series { label, points: vec![(r.k as f64, r.success_rate)] }),
        }
    }
    line_chart(title, "measurements k", "success rate", &series)
}

#[derive(Serialize)]
struct Summary<'a> {
    schema: &'a str,
    experiment: &'a str,
    n: usize,
    m: usize,
    rows: &'a [ResultRow],
}

/// `results.csv`, `results.json`, `chart.svg`, `run-config.json` and the
/// non-deterministic `timings.csv`.
pub fn write_rate_outputs(cfg: &ExperimentConfig, rows: &[ResultRow], title: &str) -> Result<()> {
    prepare_dir(cfg)?;
    let dir = &cfg.output_dir;
    write_file(dir, "results.csv", rows_csv(rows)?)?;
    let summary = Summary { schema: CSV_SCHEMA, experiment: cfg.experiment.name(), n: cfg.n, m: cfg.m, rows };
    write_file(dir, "results.json", json_pretty(&summary)?)?;
    write_file(dir, "chart.svg", success_chart(title, rows))?;
    write_file(dir, "timings.csv", timings_csv(rows)?)
}
