use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use stcs_core::recovery::SolverConfig;
use stcs_core::{DistKind, OperatorKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Sweep,
    Image,
    Sysid,
    Pwc,
    RipAudit,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Sweep => "sweep",
            Experiment::Image => "image",
            Experiment::Sysid => "sysid",
            Experiment::Pwc => "pwc",
            Experiment::RipAudit => "rip_audit",
        }
    }
}

/// Everything a run depends on. `m` is the sparsity and `k` the number of
/// measurements throughout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n: usize,
    pub m: usize,
    pub k_grid: Vec<usize>,
    pub trials: usize,
    pub matrix_kinds: Vec<OperatorKind>,
    pub dist: DistKind,
    pub master_seed: u64,
    pub solver: SolverConfig,
    pub output_dir: PathBuf,
    /// Worker threads; `None` uses one per core.
    pub workers: Option<usize>,
    /// Sampled subsets for the RIP audit when exhaustive enumeration is over
    /// budget.
    pub monte_carlo: Option<usize>,
    /// Image experiment input; synthetic when absent.
    pub image: Option<PathBuf>,
    /// Image side length for the synthetic image (`n = side^2`).
    pub image_side: usize,
    /// RIP level for the probability bounds in the audit.
    pub delta: f64,
    /// Random probes per subset for the row-block decomposition check.
    pub probes: usize,
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let base = Self {
            experiment,
            n: 512,
            m: 20,
            k_grid: (60..=260).step_by(20).collect(),
            trials: 100,
            matrix_kinds: vec![OperatorKind::Toeplitz, OperatorKind::SymToeplitz],
            dist: DistKind::Gaussian,
            master_seed: 20_240_601,
            solver: SolverConfig::default(),
            output_dir: PathBuf::from(format!("out/{}", experiment.name())),
            workers: None,
            monte_carlo: None,
            image: None,
            image_side: 64,
            delta: 0.3,
            probes: 50,
        };
        match experiment {
            Experiment::Sweep => base,
            Experiment::Image => Self { n: 4096, m: 739, k_grid: vec![2400], trials: 1, ..base },
            Experiment::Sysid => Self {
                k_grid: vec![60, 80, 100, 120, 160, 200],
                matrix_kinds: vec![OperatorKind::SymToeplitz],
                ..base
            },
            Experiment::Pwc => Self {
                n: 256,
                m: 5,
                k_grid: vec![10, 15, 20, 30, 40, 80],
                matrix_kinds: vec![OperatorKind::SymToeplitz],
                ..base
            },
            Experiment::RipAudit => Self {
                n: 14,
                m: 1,
                k_grid: vec![10],
                trials: 1,
                matrix_kinds: vec![OperatorKind::SymToeplitz, OperatorKind::LeftSymToeplitz],
                ..base
            },
        }
    }

    /// Defaults for `experiment`, overlaid with the JSON object in `path`
    /// (nested objects merge key by key).
    pub fn load(experiment: Experiment, path: Option<&Path>) -> Result<Self> {
        let mut value = serde_json::to_value(Self::defaults(experiment))?;
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let file: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            if !file.is_object() {
                bail!("{}: config must be a JSON object", path.display());
            }
            if let Some(e) = file.get("experiment") {
                if e != &Value::from(experiment.name()) {
                    bail!("{}: config is for experiment {e}, not {:?}", path.display(), experiment.name());
                }
            }
            merge(&mut value, file);
        }
        let cfg: Self = serde_json::from_value(value).context("invalid config")?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 || self.m > self.n {
            bail!("need 1 <= m <= n, got m = {}, n = {}", self.m, self.n);
        }
        if self.trials == 0 {
            bail!("trials must be >= 1");
        }
        if self.k_grid.is_empty() || self.k_grid.windows(2).any(|w| w[0] >= w[1]) {
            bail!("k_grid must be nonempty and strictly ascending");
        }
        if self.k_grid[0] == 0 || *self.k_grid.last().unwrap() > self.n {
            bail!("every k must lie in 1..={}", self.n);
        }
        if self.matrix_kinds.is_empty() {
            bail!("matrix_kinds must not be empty");
        }
        if self.workers == Some(0) {
            bail!("workers must be >= 1");
        }
        if self.monte_carlo == Some(0) {
            bail!("monte_carlo must be >= 1");
        }
        let s = &self.solver;
        if !(s.feas_tol > 0.0 && s.change_tol > 0.0 && s.step_ratio > 0.0 && s.success_rel_tol > 0.0 && s.max_iters > 0) {
            bail!("solver tolerances and iteration budget must be positive");
        }
        if self.experiment == Experiment::Image && self.image.is_none() && self.image_side * self.image_side != self.n {
            bail!("synthetic image needs n = image_side^2, got n = {}, side = {}", self.n, self.image_side);
        }
        if self.experiment == Experiment::RipAudit && !(self.delta > 0.0 && self.delta < 1.0 / 3.0) {
            bail!("delta must lie in (0, 1/3)");
        }
        if matches!(self.experiment, Experiment::Sysid | Experiment::Pwc)
            && self.matrix_kinds != [OperatorKind::SymToeplitz]
        {
            bail!("{} runs only with matrix_kinds = [\"sym_toeplitz\"]", self.experiment.name());
        }
        Ok(())
    }

    pub fn worker_count(&self) -> usize {
        self.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (key, v) in o {
                match b.get_mut(&key) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(key, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}
