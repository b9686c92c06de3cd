use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use stcs_cli::config::{Experiment, ExperimentConfig};
use stcs_core::pipelines::{identify_system, read_vector_csv, write_vector_csv, ProbeSequence};
use stcs_core::{DistKind, DistributionSpec, OperatorDescriptor, OperatorKind, SeedSpec};

#[derive(Parser)]
#[command(name = "stcs", version, about = "Symmetric Toeplitz compressed sensing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Success rate against measurement count.
    Sweep(Common),
    /// Sparse image reconstruction and MSE.
    Image {
        #[command(flatten)]
        common: Common,
        /// PGM input instead of the synthetic image.
        #[arg(long)]
        image: Option<PathBuf>,
    },
    /// Impulse-response identification with a symmetric probe.
    Sysid {
        #[command(flatten)]
        common: Common,
        /// Identify once from a probe CSV (full symmetric sequence) ...
        #[arg(long, requires = "response")]
        probe: Option<PathBuf>,
        /// ... and a response CSV of k samples; writes x_hat.csv.
        #[arg(long, requires = "probe")]
        response: Option<PathBuf>,
    },
    /// Piecewise-constant signal recovery.
    Pwc(Common),
    /// Restricted isometry, dependency graph, partition and bound report.
    RipAudit(Common),
    /// Materialize one operator as descriptor.json and matrix.csv.
    GenMatrix(GenMatrix),
}

#[derive(Args)]
struct Common {
    /// JSON config; missing keys take the experiment defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Sampled subsets when exact RIP enumeration is over budget.
    #[arg(long)]
    monte_carlo: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Sparsity.
    #[arg(long)]
    m: Option<usize>,
    /// Comma-separated measurement counts.
    #[arg(long, value_delimiter = ',')]
    k_grid: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated operator kinds.
    #[arg(long, value_delimiter = ',')]
    kinds: Option<Vec<OperatorKind>>,
    #[arg(long)]
    dist: Option<DistKind>,
    /// Print the resolved config as JSON and exit.
    #[arg(long)]
    print_config: bool,
}

impl Common {
    fn resolve(&self, experiment: Experiment) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(experiment, self.config.as_deref())?;
        if let Some(v) = self.seed {
            cfg.master_seed = v;
        }
        if let Some(v) = &self.out {
            cfg.output_dir = v.clone();
        }
        if let Some(v) = self.workers {
            cfg.workers = Some(v);
        }
        if let Some(v) = self.monte_carlo {
            cfg.monte_carlo = Some(v);
        }
        if let Some(v) = self.n {
            cfg.n = v;
        }
        if let Some(v) = self.m {
            cfg.m = v;
        }
        if let Some(v) = &self.k_grid {
            cfg.k_grid = v.clone();
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(v) = &self.kinds {
            cfg.matrix_kinds = v.clone();
        }
        if let Some(v) = self.dist {
            cfg.dist = v;
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct GenMatrix {
    #[arg(long)]
    kind: OperatorKind,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "gaussian")]
    dist: DistKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// 0-based row indices of the full n x n matrix.
    #[arg(long, value_delimiter = ',')]
    theta: Option<Vec<usize>>,
    /// Right-compose with the differencing operator.
    #[arg(long)]
    compose_d: bool,
    #[arg(long, default_value = "out/matrix")]
    out: PathBuf,
}

fn experiment(common: &Common, experiment: Experiment, edit: impl FnOnce(&mut ExperimentConfig)) -> Result<()> {
    let mut cfg = common.resolve(experiment)?;
    edit(&mut cfg);
    if common.print_config {
        println!("{}", serde_json::to_string_pretty(&cfg)?);
        return Ok(());
    }
    stcs_cli::run_experiment(&cfg)?;
    println!("wrote {}", cfg.output_dir.display());
    Ok(())
}

fn identify_from_files(common: &Common, probe: &PathBuf, response: &PathBuf) -> Result<()> {
    let cfg = common.resolve(Experiment::Sysid)?;
    let read = |p: &PathBuf| -> Result<Vec<f64>> {
        let f = std::fs::File::open(p).with_context(|| format!("opening {}", p.display()))?;
        Ok(read_vector_csv(f).with_context(|| format!("reading {}", p.display()))?)
    };
    let full = read(probe)?;
    let y = read(response)?;
    let k = y.len();
    if k == 0 || full.len() < k {
        bail!("probe of length {} cannot produce {k} samples", full.len());
    }
    let n = full.len() + 1 - k;
    let p = ProbeSequence::new(full[..n].to_vec(), k)?;
    if p.full() != full {
        bail!("probe is not symmetric about position {}", n - 1);
    }
    let res = identify_system(&p, &y, &cfg.solver)?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    write_vector_csv(std::fs::File::create(cfg.output_dir.join("x_hat.csv"))?, &res.x_hat)?;
    std::fs::write(cfg.output_dir.join("result.json"), serde_json::to_string_pretty(&res)? + "\n")?;
    println!("wrote {}", cfg.output_dir.display());
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Sweep(c) => experiment(&c, Experiment::Sweep, |_| {}),
        Command::Image { common, image } => experiment(&common, Experiment::Image, |cfg| {
            if image.is_some() {
                cfg.image = image;
            }
        }),
        Command::Sysid { common, probe: Some(p), response: Some(r) } => identify_from_files(&common, &p, &r),
        Command::Sysid { common, .. } => experiment(&common, Experiment::Sysid, |_| {}),
        Command::Pwc(c) => experiment(&c, Experiment::Pwc, |_| {}),
        Command::RipAudit(c) => experiment(&c, Experiment::RipAudit, |_| {}),
        Command::GenMatrix(g) => {
            let desc = OperatorDescriptor {
                kind: g.kind,
                k: g.k,
                n: g.n,
                generator: None,
                dist: Some(DistributionSpec::new(g.dist, g.k)?),
                seed: Some(SeedSpec::new(g.seed, 0)),
                theta: g.theta,
                compose_d: g.compose_d,
            };
            stcs_cli::genmatrix::gen_matrix(&desc, &g.out)?;
            println!("wrote {}", g.out.display());
            Ok(())
        }
    }
}
