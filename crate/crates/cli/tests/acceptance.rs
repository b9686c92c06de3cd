//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::HashSet;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use stcs_cli::config::{Experiment, ExperimentConfig};
use stcs_cli::image::{image_csv, run_image};
use stcs_cli::run::{rows_csv, ResultRow};
use stcs_cli::sweep::run_sweep;
use stcs_core::linalg::{dot, norm2, sub, DenseMatrix};
use stcs_core::operators::{build_d, build_l};
use stcs_core::randgen::{draw_rademacher_spikes, sample_subset};
use stcs_core::recovery::{basis_pursuit, omp, RecoveryResult, SolverConfig};
use stcs_core::riplab::{
    c0, dependency_graph, equitable_coloring, f_value, q_for, rip_exact, rip_monte_carlo, theory_bounds,
    verify_decomposition, RipOptions, TheoryParams,
};
use stcs_core::{DistKind, DistributionSpec, GeneratorSource, LinearMap, MeasurementOperator, OperatorKind, SeedSpec};
use stcs_oracles::{
    dependency_edges, is_equitable_coloring, l1_min_vertex_enumeration, left_sym_toeplitz_pattern, rip_brute_force,
    subset_deviation, sym_toeplitz_pattern, Rows, THEORY_GRID_JSON,
};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rows_of(m: &DenseMatrix) -> Rows {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn dist(kind: DistKind, k: usize) -> DistributionSpec {
    DistributionSpec::new(kind, k).unwrap()
}

fn pick<T: Copy>(rng: &mut ChaCha8Rng, xs: &[T]) -> T {
    xs[rng.random_range(0..xs.len())]
}

fn structure_exactness() -> Check {
    let mut checked = 0;
    for n in 1..=8 {
        let generator: Vec<f64> = (1..=n).map(|i| (i as f64).exp2()).collect();
        for k in 1..=n {
            for (kind, pattern) in [
                (OperatorKind::SymToeplitz, sym_toeplitz_pattern(k, n)),
                (OperatorKind::LeftSymToeplitz, left_sym_toeplitz_pattern(k, n)),
            ] {
                let a = MeasurementOperator::explicit(kind, k, n, generator.clone()).map_err(|e| e.to_string())?.to_dense();
                for i in 0..k {
                    for j in 0..n {
                        ensure(a[(i, j)] == (pattern[i][j] as f64).exp2(), || {
                            format!("{kind} k={k} n={n} entry ({i},{j})")
                        })?;
                        checked += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{checked} entries, all n <= 8"))
}

fn operator_algebra() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_pair: f64 = 0.0;
    for t in 0..1000u64 {
        let kind = pick(&mut rng, &OperatorKind::ALL);
        let n = rng.random_range(1..=300);
        let k = rng.random_range(1..=n);
        let theta = (kind.is_symmetric() && rng.random_bool(0.3)).then(|| {
            let mut th = sample_subset(&mut rng, n, k);
            th.sort_unstable();
            th
        });
        let src = GeneratorSource::Random { dist: dist(pick(&mut rng, &DistKind::ALL), k), seed: SeedSpec::new(2, t) };
        let mut op = MeasurementOperator::build(kind, k, n, src, theta).map_err(|e| e.to_string())?;
        if rng.random_bool(0.3) {
            op = op.compose_with_d();
        }
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ax = op.apply(&x).map_err(|e| e.to_string())?;
        let aty = op.apply_adjoint(&y).map_err(|e| e.to_string())?;
        let (l, r) = (dot(&ax, &y), dot(&x, &aty));
        let scale = norm2(&ax) * norm2(&y) + norm2(&x) * norm2(&aty);
        worst_pair = worst_pair.max((l - r).abs() / scale.max(f64::MIN_POSITIVE));
    }
    ensure(worst_pair <= 1e-10, || format!("adjoint pairing error {worst_pair:e}"))?;

    let mut worst_fast: f64 = 0.0;
    for (i, &(kind, k, n)) in [
        (OperatorKind::Toeplitz, 64, 256),
        (OperatorKind::SymToeplitz, 300, 1024),
        (OperatorKind::LeftSymToeplitz, 128, 2048),
        (OperatorKind::SymToeplitz, 96, 4096),
        (OperatorKind::Toeplitz, 64, 4096),
        (OperatorKind::LeftSymToeplitz, 40, 4096),
    ]
    .iter()
    .enumerate()
    {
        let op = MeasurementOperator::random(kind, k, n, dist(DistKind::Gaussian, k), SeedSpec::new(3, i as u64))
            .map_err(|e| e.to_string())?;
        ensure(op.uses_fast_path(), || format!("{kind} n={n} not on the fast path"))?;
        let dense = op.to_dense();
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = op.apply(&x).map_err(|e| e.to_string())?;
        let d = dense.matvec(&x);
        worst_fast = worst_fast.max(norm2(&sub(&f, &d)) / norm2(&d));
        let fa = op.apply_adjoint(&y).map_err(|e| e.to_string())?;
        let da = dense.matvec_transpose(&y);
        worst_fast = worst_fast.max(norm2(&sub(&fa, &da)) / norm2(&da));
    }
    ensure(worst_fast <= 1e-12, || format!("fast vs dense error {worst_fast:e}"))?;

    let mut worst_fact: f64 = 0.0;
    for (i, n) in [1usize, 2, 3, 8, 64, 200, 512].into_iter().enumerate() {
        let l = build_l(n);
        ensure(build_d(n).matmul(&l) == DenseMatrix::identity(n), || format!("D L != I at n={n}"))?;
        for kind in [OperatorKind::SymToeplitz, OperatorKind::LeftSymToeplitz] {
            let k = (n / 3).max(1);
            let a = MeasurementOperator::random(kind, k, n, dist(DistKind::Gaussian, k), SeedSpec::new(4, i as u64))
                .map_err(|e| e.to_string())?;
            let ad = a.clone().compose_with_d().to_dense();
            let ref_a = a.to_dense();
            worst_fact = worst_fact.max(ad.matmul(&l).max_abs_diff(&ref_a));
        }
    }
    ensure(worst_fact <= 1e-12, || format!("(A D) L vs A error {worst_fact:e}"))?;
    Ok(format!("pairing {worst_pair:.1e}, fast path {worst_fast:.1e}, (AD)L-A {worst_fact:.1e}"))
}

fn lemma_machinery() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut partitions = 0;
    let mut worst_res: f64 = 0.0;
    for t in 0..1000u64 {
        let m = rng.random_range(1..=2usize);
        let n = rng.random_range(3 * m..=40);
        let k = rng.random_range(1..=n);
        let kind = pick(&mut rng, &[OperatorKind::SymToeplitz, OperatorKind::LeftSymToeplitz]);
        let op = MeasurementOperator::random(kind, k, n, dist(pick(&mut rng, &DistKind::ALL), k), SeedSpec::new(5, t))
            .map_err(|e| e.to_string())?;
        let mut subset = sample_subset(&mut rng, n, 3 * m);
        subset.sort_unstable();
        let dep = dependency_graph(&op, &subset).map_err(|e| e.to_string())?;
        let pattern = match kind {
            OperatorKind::SymToeplitz => sym_toeplitz_pattern(k, n),
            _ => left_sym_toeplitz_pattern(k, n),
        };
        let mut want = dependency_edges(&pattern, &subset);
        let mut got: Vec<_> = dep.graph.edges().collect();
        want.sort_unstable();
        got.sort_unstable();
        ensure(got == want, || format!("instance {t}: dependency graph differs from oracle"))?;
        let q = q_for(m);
        ensure(dep.max_degree < q, || format!("instance {t}: degree {} > {}", dep.max_degree, q - 1))?;
        let part = equitable_coloring(&dep.graph, q).map_err(|e| format!("instance {t}: {e}"))?;
        ensure(is_equitable_coloring(k, &want, q, &part.classes), || format!("instance {t}: partition rejected"))?;
        partitions += 1;
        let probes: Vec<Vec<f64>> =
            (0..50).map(|_| (0..subset.len()).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let rep = verify_decomposition(&op, &subset, &part, &probes).map_err(|e| e.to_string())?;
        worst_res = worst_res.max(rep.max_rel_residual_blocks).max(rep.max_rel_residual_rescaled);
    }
    ensure(worst_res <= 1e-10, || format!("decomposition residual {worst_res:e}"))?;
    Ok(format!("1000 instances, 0 degree violations, {partitions} partitions verified, residual {worst_res:.1e}"))
}

fn rip_equivalence() -> Check {
    let mut worst: f64 = 0.0;
    let mut instances = 0;
    for t in 0..24u64 {
        let kind = OperatorKind::ALL[t as usize % 4];
        let s = 1 + (t as usize / 4) % 3;
        let op = MeasurementOperator::random(kind, 8, 12, dist(DistKind::ALL[t as usize % 3], 8), SeedSpec::new(6, t))
            .map_err(|e| e.to_string())?;
        let exact = rip_exact(&op, s, RipOptions::default()).map_err(|e| e.to_string())?;
        let dense = rows_of(&op.to_dense());
        let (delta, _) = rip_brute_force(&dense, s);
        worst = worst.max((exact.delta - delta).abs());
        worst = worst.max((subset_deviation(&dense, &exact.witness_subset) - delta).abs());
        instances += 1;
    }
    ensure(worst <= 1e-10, || format!("exact vs brute force {worst:e}"))?;
    for t in 0..200u64 {
        let kind = OperatorKind::ALL[t as usize % 4];
        let op = MeasurementOperator::random(kind, 8, 12, dist(DistKind::Gaussian, 8), SeedSpec::new(7, t))
            .map_err(|e| e.to_string())?;
        let exact = rip_exact(&op, 3, RipOptions::default()).map_err(|e| e.to_string())?;
        let mc = rip_monte_carlo(&op, 3, 1 + (t as usize % 60), SeedSpec::new(8, t)).map_err(|e| e.to_string())?;
        ensure(mc.delta <= exact.delta, || format!("run {t}: monte carlo {} > exact {}", mc.delta, exact.delta))?;
    }
    Ok(format!("{instances} instances within {worst:.1e}; 200 monte carlo runs <= exact"))
}

fn theory_evaluators() -> Check {
    ensure(q_for(1) == 16, || format!("q(1) = {}", q_for(1)))?;
    ensure(c0(0.3) == 0.0050625, || format!("c0(0.3) = {}", c0(0.3)))?;
    let grid: Vec<Value> = serde_json::from_str::<Value>(THEORY_GRID_JSON).unwrap().as_array().unwrap().clone();
    ensure(grid.len() == 20, || "grid size".into())?;
    let mut worst: f64 = 0.0;
    for r in &grid {
        let g = |key: &str| r[key].as_f64().unwrap();
        let u = |key: &str| r[key].as_u64().unwrap() as usize;
        let (n, m, k, delta) = (u("n"), u("m"), u("k"), g("delta"));
        let b = theory_bounds(TheoryParams::new(n, m, k, delta)).map_err(|e| e.to_string())?;
        ensure(b.q == u("q"), || format!("q at n={n} m={m}"))?;
        for (got, key) in [
            (f_value(k, m, delta), "f"),
            (b.lemma.exponent, "lemma_exponent"),
            (b.lemma.raw, "lemma_raw"),
            (b.union.exponent, "union_exponent"),
            (b.union.raw, "union_raw"),
            (b.simplified.raw, "simplified_raw"),
            (b.c1_min, "c1_min"),
            (b.k_threshold, "k_threshold"),
        ] {
            let want = g(key);
            let rel = (got - want).abs() / want.abs();
            ensure(rel <= 1e-12, || format!("{key} at n={n} m={m} k={k} delta={delta}: rel {rel:e}"))?;
            worst = worst.max(rel);
        }
    }
    Ok(format!("q(1)=16, c0(0.3)=0.0050625, 20-point grid max rel {worst:.1e}"))
}

/// `(A^T nu)_S = sign(x_S)` and `|A^T nu|_inf <= 1` with slack `1e-6`.
fn dual_ok(op: &dyn LinearMap, r: &RecoveryResult) -> bool {
    let Some(nu) = &r.dual else { return false };
    let g = op.adjoint(nu);
    let on_support = r.x_hat.iter().zip(&g).all(|(x, g)| *x == 0.0 || (g - x.signum()).abs() <= 1e-6);
    on_support && g.iter().all(|v| v.abs() <= 1.0 + 1e-6)
}

fn support(x: &[f64]) -> Vec<usize> {
    let scale = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    (0..x.len()).filter(|&j| x[j].abs() > 1e-6 * scale).collect()
}

fn solver_correctness() -> Check {
    let cfg = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut lp = 0;
    let mut worst: f64 = 0.0;
    let mut duals = 0;
    while lp < 50 {
        let a = DenseMatrix::from_fn(3, 6, |_, _| rng.random_range(-6i32..=6) as f64 / 2.0);
        let y: Vec<f64> = (0..3).map(|_| rng.random_range(-5i32..=5) as f64).collect();
        let Some(opt) = l1_min_vertex_enumeration(&rows_of(&a), &y) else { continue };
        if opt.l1 == 0.0 {
            continue;
        }
        let r = basis_pursuit(&a, &y, &cfg).map_err(|e| e.to_string())?;
        let rel = (r.l1_value - opt.l1).abs() / opt.l1;
        ensure(rel <= 1e-6, || format!("lp instance {lp}: l1 {} vs oracle {}", r.l1_value, opt.l1))?;
        ensure(dual_ok(&a, &r), || format!("lp instance {lp}: dual certificate fails"))?;
        worst = worst.max(rel);
        duals += 1;
        lp += 1;
    }
    let mut agree = 0;
    for t in 0..1000u64 {
        let op = MeasurementOperator::random(OperatorKind::IidDense, 32, 64, dist(DistKind::Gaussian, 32), SeedSpec::new(10, t))
            .map_err(|e| e.to_string())?;
        let x = draw_rademacher_spikes(64, 3, SeedSpec::new(11, t)).map_err(|e| e.to_string())?;
        let y = op.apply(&x.to_dense()).map_err(|e| e.to_string())?;
        let b = basis_pursuit(&op, &y, &cfg).map_err(|e| e.to_string())?;
        ensure(dual_ok(&op, &b), || format!("trial {t}: dual certificate fails"))?;
        duals += 1;
        let o = omp(&op, &y, 32, 1e-10).map_err(|e| e.to_string())?;
        agree += usize::from(support(&b.x_hat) == support(&o.x_hat));
    }
    ensure(agree >= 990, || format!("OMP/BP support agreement {agree}/1000"))?;
    Ok(format!("50 LP instances within {worst:.1e}; {duals} dual certificates; OMP/BP agree {agree}/1000"))
}

fn sweep_config() -> ExperimentConfig {
    ExperimentConfig { output_dir: std::env::temp_dir(), ..ExperimentConfig::defaults(Experiment::Sweep) }
}

fn fig_sweep(rows: &[ResultRow]) -> Check {
    let cfg = sweep_config();
    let mut detail = Vec::new();
    for kind in [OperatorKind::Toeplitz, OperatorKind::SymToeplitz] {
        let curve: Vec<&ResultRow> = rows.iter().filter(|r| r.matrix_kind == kind).collect();
        ensure(curve.len() == cfg.k_grid.len(), || format!("{kind}: missing cells"))?;
        for w in curve.windows(2) {
            let t = cfg.trials as f64;
            let (p, q) = (w[0].success_rate, w[1].success_rate);
            let se = ((p * (1.0 - p) + q * (1.0 - q)) / t).sqrt();
            ensure(q >= p - 3.0 * se, || format!("{kind}: rate drops from {p} at k={} to {q} at k={}", w[0].k, w[1].k))?;
        }
        let top = curve.last().unwrap();
        ensure(top.k == 260 && top.success_rate >= 0.95, || format!("{kind}: {} at k={}", top.success_rate, top.k))?;
        detail.push(format!(
            "{kind} [{}]",
            curve.iter().map(|r| format!("{:.2}", r.success_rate)).collect::<Vec<_>>().join(" ")
        ));
    }
    let mut gap: f64 = 0.0;
    for k in &cfg.k_grid {
        let rate = |kind| rows.iter().find(|r| r.matrix_kind == kind && r.k == *k).unwrap().success_rate;
        gap = gap.max((rate(OperatorKind::Toeplitz) - rate(OperatorKind::SymToeplitz)).abs());
    }
    ensure(gap <= 0.10, || format!("curves differ by {gap}"))?;
    Ok(format!("{}; max gap {:.0} pp", detail.join("; "), gap * 100.0))
}

fn image_config(k_grid: Vec<usize>) -> ExperimentConfig {
    ExperimentConfig { k_grid, output_dir: std::env::temp_dir(), ..ExperimentConfig::defaults(Experiment::Image) }
}

fn fig_image(csv_main: &str, csv_square: &str) -> Check {
    let mse_of = |csv: &str| -> Vec<(String, f64)> {
        csv.lines()
            .skip(2)
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                (f[0].to_string(), f[5].parse().unwrap())
            })
            .collect()
    };
    let main = mse_of(csv_main);
    let get = |kind: &str| main.iter().find(|(k, _)| k == kind).map(|p| p.1).unwrap_or(f64::INFINITY);
    let (t, s) = (get("toeplitz"), get("sym_toeplitz"));
    ensure(t <= 0.1 && s <= 0.1, || format!("MSE toeplitz {t:e}, sym_toeplitz {s:e}"))?;
    ensure((t - s).abs() <= 0.05, || format!("MSE gap {}", (t - s).abs()))?;
    let square = mse_of(csv_square);
    let worst = square.iter().map(|p| p.1).fold(0.0, f64::max);
    ensure(square.len() == 2 && worst <= 1e-6, || format!("square-system MSE {worst:e}"))?;
    Ok(format!("k=2400 MSE toeplitz {t:.2e}, sym_toeplitz {s:.2e}; k=n MSE <= {worst:.1e}"))
}

fn generator_economy() -> Check {
    let d = dist(DistKind::Gaussian, 128);
    let sym = MeasurementOperator::random(OperatorKind::SymToeplitz, 128, 512, d, SeedSpec::new(12, 0))
        .map_err(|e| e.to_string())?;
    let plain = MeasurementOperator::random(OperatorKind::Toeplitz, 128, 512, d, SeedSpec::new(12, 0))
        .map_err(|e| e.to_string())?;
    let distinct = |op: &MeasurementOperator| op.to_dense().as_slice().iter().map(|v| v.to_bits()).collect::<HashSet<_>>().len();
    let (ds, dp) = (sym.independent_draws(), plain.independent_draws());
    ensure(ds == 512 && dp == 639, || format!("draws {ds} vs {dp}"))?;
    ensure(distinct(&sym) == 512 && distinct(&plain) == 639, || "distinct entry count mismatch".into())?;
    Ok(format!("{ds} draws vs {dp}"))
}

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, id: usize, name: &str, started: Instant, result: Check) {
        let secs = started.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {id:>2} PASS  {name}: {detail} ({secs:.1}s)"),
            Err(why) => {
                self.failures += 1;
                println!("criterion {id:>2} FAIL  {name}: {why} ({secs:.1}s)");
            }
        }
    }
}

fn main() {
    let mut rep = Report { failures: 0 };
    let t = Instant::now();
    rep.line(1, "structure exactness", t, structure_exactness());
    let t = Instant::now();
    rep.line(2, "operator algebra", t, operator_algebra());
    let t = Instant::now();
    rep.line(3, "dependency graph, partition, decomposition", t, lemma_machinery());
    let t = Instant::now();
    rep.line(4, "RIP oracle equivalence", t, rip_equivalence());
    let t = Instant::now();
    rep.line(5, "theory evaluators", t, theory_evaluators());
    let t = Instant::now();
    rep.line(6, "solver correctness", t, solver_correctness());

    let t = Instant::now();
    let sweep = run_sweep(&sweep_config()).map_err(|e| e.to_string());
    let sweep_csv = sweep.as_ref().ok().map(|rows| rows_csv(rows).unwrap());
    rep.line(7, "success-rate sweep", t, sweep.as_ref().map_err(Clone::clone).and_then(|rows| fig_sweep(rows)));

    let t = Instant::now();
    let image = |grid| run_image(&image_config(grid)).map_err(|e| e.to_string()).and_then(|o| image_csv(&o.rows).map_err(|e| e.to_string()));
    let main_csv = image(vec![2400]);
    let square_csv = image(vec![4096]);
    let result = match (&main_csv, &square_csv) {
        (Ok(a), Ok(b)) => fig_image(a, b),
        (Err(e), _) | (_, Err(e)) => Err(e.clone()),
    };
    rep.line(8, "image reconstruction", t, result);

    let t = Instant::now();
    rep.line(9, "generator economy", t, generator_economy());

    let t = Instant::now();
    let rerun = || -> Check {
        let again = ExperimentConfig { workers: Some(2), ..sweep_config() };
        let s2 = rows_csv(&run_sweep(&again).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        ensure(sweep_csv.as_deref() == Some(s2.as_str()), || "sweep CSV differs on rerun".into())?;
        let i2 = image(vec![2400])?;
        ensure(main_csv.as_deref().ok() == Some(i2.as_str()), || "image CSV differs on rerun".into())?;
        Ok(format!("sweep {} bytes and image {} bytes identical", s2.len(), i2.len()))
    };
    rep.line(10, "determinism", t, rerun());

    println!("acceptance: {} of 10 criteria passed", 10 - rep.failures);
    if rep.failures > 0 {
        std::process::exit(1);
    }
}
