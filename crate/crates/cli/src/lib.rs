//! Experiment harness for symmetric Toeplitz compressed sensing: the
//! success-rate sweep, sparse image reconstruction, system identification,
//! piecewise-constant recovery and the RIP audit, plus PGM and SVG output.

pub mod apps;
pub mod audit;
pub mod config;
pub mod genmatrix;
pub mod image;
pub mod pgm;
pub mod run;
pub mod svg;
pub mod sweep;

use anyhow::Result;

use config::{Experiment, ExperimentConfig};

/// Runs the configured experiment and writes its output files.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<()> {
    match cfg.experiment {
        Experiment::Sweep => {
            let rows = sweep::run_sweep(cfg)?;
            sweep::write_rate_outputs(cfg, &rows, &format!("Recovery rate, n = {}, m = {}", cfg.n, cfg.m))
        }
        Experiment::Sysid => {
            let rows = apps::run_sysid(cfg)?;
            sweep::write_rate_outputs(cfg, &rows, &format!("System identification, n = {}, m = {}", cfg.n, cfg.m))
        }
        Experiment::Pwc => {
            let rows = apps::run_pwc(cfg)?;
            sweep::write_rate_outputs(cfg, &rows, &format!("Piecewise-constant recovery, n = {}, m = {}", cfg.n, cfg.m))
        }
        Experiment::Image => {
            let out = image::run_image(cfg)?;
            image::write_image_outputs(cfg, &out)
        }
        Experiment::RipAudit => {
            let reports = audit::run_rip_audit(cfg)?;
            audit::write_audit_outputs(cfg, &reports)
        }
    }
}
