//! Sparse image reconstruction.

use anyhow::{bail, Result};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use stcs_core::linalg::norm2;
use stcs_core::randgen::sample_subset;
use stcs_core::recovery::{basis_pursuit, mse_frobenius};
use stcs_core::{DistributionSpec, MeasurementOperator, OperatorKind, SeedSpec};

use crate::config::ExperimentConfig;
use crate::pgm::{read_pgm, write_pgm, ImageGray};
use crate::run::{cell_seed, json_pretty, pool, prepare_dir, table_csv, timed, write_file, Purpose, CSV_SCHEMA};

/// `side x side` image with exactly `m` nonzero pixels at uniform
/// positions, intensities uniform on `[0.2, 1]`.
pub fn synthetic_image(side: usize, m: usize, seed: SeedSpec) -> Result<ImageGray> {
    let n = side * side;
    if m == 0 || m > n {
        bail!("need 1 <= m <= {n} nonzero pixels, got {m}");
    }
    let mut rng = seed.rng();
    let mut pixels = vec![0.0; n];
    for j in sample_subset(&mut rng, n, m) {
        pixels[j] = rng.random_range(0.2..=1.0);
    }
    Ok(ImageGray::new(side, side, pixels)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRow {
    pub matrix_kind: OperatorKind,
    pub k: usize,
    pub trial: usize,
    pub n: usize,
    pub m: usize,
    pub mse: f64,
    pub relative_residual: f64,
    pub iters: usize,
    pub certified: bool,
    #[serde(skip)]
    pub solve_seconds: f64,
}

pub struct ImageOutcome {
    pub truth: ImageGray,
    pub rows: Vec<ImageRow>,
    pub reconstructions: Vec<ImageGray>,
}

pub fn load_image(cfg: &ExperimentConfig) -> Result<ImageGray> {
    let img = match &cfg.image {
        Some(path) => read_pgm(path)?,
        None => synthetic_image(cfg.image_side, cfg.m, SeedSpec::new(cfg.master_seed, 0).derive(&[2, u64::MAX]))?,
    };
    if norm2(&img.pixels) == 0.0 {
        bail!("image is all zero; the relative error is undefined");
    }
    Ok(img)
}

pub fn run_image(cfg: &ExperimentConfig) -> Result<ImageOutcome> {
    let mut cfg = cfg.clone();
    let truth = load_image(&cfg)?;
    cfg.n = truth.pixels.len();
    cfg.m = truth.nonzero_count();
    cfg.validate()?;
    let cfg = &cfg;
    let tasks: Vec<(OperatorKind, usize, usize)> = cfg
        .matrix_kinds
        .iter()
        .flat_map(|&kind| cfg.k_grid.iter().flat_map(move |&k| (0..cfg.trials).map(move |t| (kind, k, t))))
        .collect();
    let results: Vec<(ImageRow, ImageGray)> = pool(cfg)?.install(|| {
        tasks
            .par_iter()
            .map(|&(kind, k, trial)| {
                let dist = DistributionSpec::new(cfg.dist, k)?;
                let op = MeasurementOperator::random(kind, k, cfg.n, dist, cell_seed(cfg, kind, k, trial, Purpose::Operator))?;
                let y = op.apply(&truth.pixels)?;
                let (res, seconds) = timed(|| basis_pursuit(&op, &y, &cfg.solver));
                let res = res?;
                let row = ImageRow {
                    matrix_kind: kind,
                    k,
                    trial,
                    n: cfg.n,
                    m: cfg.m,
                    mse: mse_frobenius(&res.x_hat, &truth.pixels)?,
                    relative_residual: res.relative_residual(norm2(&y)),
                    iters: res.iters,
                    certified: res.certified,
                    solve_seconds: seconds,
                };
                let shown = res.x_hat.iter().map(|p| p.clamp(0.0, 1.0)).collect();
                Ok((row, ImageGray::new(truth.width, truth.height, shown)?))
            })
            .collect::<Result<_>>()
    })?;
    let (rows, reconstructions) = results.into_iter().unzip();
    Ok(ImageOutcome { truth, rows, reconstructions })
}

pub fn image_csv(rows: &[ImageRow]) -> Result<String> {
    table_csv(
        &["matrix_kind", "k", "trial", "n", "m", "mse", "relative_residual", "iters", "certified"],
        rows.iter().map(|r| {
            vec![
                r.matrix_kind.to_string(),
                r.k.to_string(),
                r.trial.to_string(),
                r.n.to_string(),
                r.m.to_string(),
                format!("{:?}", r.mse),
                format!("{:?}", r.relative_residual),
                r.iters.to_string(),
                r.certified.to_string(),
            ]
        }),
    )
}

#[derive(Serialize)]
struct Summary<'a> {
    schema: &'a str,
    experiment: &'a str,
    width: usize,
    height: usize,
    rows: &'a [ImageRow],
}

/// `results.csv`, `results.json`, `run-config.json`, `timings.csv`,
/// `original.pgm` and one `recon-<kind>-k<k>-t<trial>.pgm` per solve.
pub fn write_image_outputs(cfg: &ExperimentConfig, out: &ImageOutcome) -> Result<()> {
    prepare_dir(cfg)?;
    let dir = &cfg.output_dir;
    write_file(dir, "results.csv", image_csv(&out.rows)?)?;
    let summary = Summary {
        schema: CSV_SCHEMA,
        experiment: cfg.experiment.name(),
        width: out.truth.width,
        height: out.truth.height,
        rows: &out.rows,
    };
    write_file(dir, "results.json", json_pretty(&summary)?)?;
    write_file(
        dir,
        "timings.csv",
        table_csv(
            &["matrix_kind", "k", "trial", "solve_seconds"],
            out.rows.iter().map(|r| {
                vec![r.matrix_kind.to_string(), r.k.to_string(), r.trial.to_string(), format!("{:.6}", r.solve_seconds)]
            }),
        )?,
    )?;
    write_pgm(&out.truth, &dir.join("original.pgm"))?;
    for (r, img) in out.rows.iter().zip(&out.reconstructions) {
        write_pgm(img, &dir.join(format!("recon-{}-k{}-t{}.pgm", r.matrix_kind, r.k, r.trial)))?;
    }
    Ok(())
}
