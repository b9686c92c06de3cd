use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::isometry_deviation;
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigenvalues, DenseMatrix};
use crate::operators::LinearMap;
use crate::randgen::{sample_subset, SeedSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum RipMode {
    Exact,
    /// A lower bound on the true constant from `trials` sampled subsets.
    MonteCarlo { trials: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetExtremes {
    pub subset: Vec<usize>,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RipReport {
    pub s: usize,
    pub delta: f64,
    pub mode: RipMode,
    pub subsets_evaluated: u128,
    pub witness_subset: Vec<usize>,
    pub witness_lambda_min: f64,
    pub witness_lambda_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_subset_extremes: Option<Vec<SubsetExtremes>>,
}

impl RipReport {
    /// Whether the constant certifies the isometry for the `3m`-order
    /// recovery guarantee, i.e. `delta < 1/3`.
    pub fn satisfies_order_3m(&self) -> bool {
        self.delta < 1.0 / 3.0
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RipOptions {
    /// Refuse exact enumeration above this many subsets.
    pub budget: u128,
    pub record_subsets: bool,
}

impl Default for RipOptions {
    fn default() -> Self {
        Self { budget: 10_000_000, record_subsets: false }
    }
}

pub fn n_choose_k(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Rank of a sorted subset in colexicographic order.
pub fn colex_rank(subset: &[usize]) -> u128 {
    subset.iter().enumerate().map(|(i, &c)| n_choose_k(c, i + 1)).sum()
}

/// Inverse of [`colex_rank`] for subsets of size `s`.
pub fn colex_unrank(mut rank: u128, s: usize) -> Vec<usize> {
    let mut out = vec![0; s];
    for i in (0..s).rev() {
        let mut c = i;
        while n_choose_k(c + 1, i + 1) <= rank {
            c += 1;
        }
        rank -= n_choose_k(c, i + 1);
        out[i] = c;
    }
    out
}

fn colex_next(c: &mut [usize], n: usize) -> bool {
    let s = c.len();
    for i in 0..s {
        let limit = if i + 1 < s { c[i + 1] } else { n };
        if c[i] + 1 < limit {
            c[i] += 1;
            for (j, v) in c.iter_mut().enumerate().take(i) {
                *v = j;
            }
            return true;
        }
    }
    false
}

fn columns(op: &dyn LinearMap, subset: &[usize]) -> Result<DenseMatrix> {
    if subset.is_empty() {
        return Err(Error::InvalidParameter("column subset must be nonempty".into()));
    }
    let n = op.ncols();
    if let Some(&bad) = subset.iter().find(|&&j| j >= n) {
        return Err(Error::InvalidParameter(format!("column {bad} out of range for n = {n}")));
    }
    let cols: Vec<Vec<f64>> = subset.iter().map(|&j| op.column(j)).collect();
    Ok(DenseMatrix::from_fn(op.nrows(), subset.len(), |i, j| cols[j][i]))
}

fn extremes(gram: &DenseMatrix) -> (f64, f64) {
    let ev = symmetric_eigenvalues(gram);
    (ev[0], ev[ev.len() - 1])
}

/// Extreme eigenvalues of `A_T^T A_T`.
pub fn gram_extremes(op: &dyn LinearMap, subset: &[usize]) -> Result<(f64, f64)> {
    Ok(extremes(&columns(op, subset)?.gram()))
}

/// Gram matrix of all columns, computed once and sliced per subset.
fn full_gram(op: &dyn LinearMap) -> DenseMatrix {
    let all: Vec<usize> = (0..op.ncols()).collect();
    columns(op, &all).expect("nonempty").gram()
}

fn sub_gram(g: &DenseMatrix, subset: &[usize]) -> DenseMatrix {
    DenseMatrix::from_fn(subset.len(), subset.len(), |a, b| g[(subset[a], subset[b])])
}

#[derive(Clone)]
struct Best {
    delta: f64,
    order: u128,
    subset: Vec<usize>,
    lmin: f64,
    lmax: f64,
}

fn better(a: Best, b: Best) -> Best {
    if b.delta > a.delta || (b.delta == a.delta && b.order < a.order) {
        b
    } else {
        a
    }
}

fn evaluate(g: &DenseMatrix, subset: &[usize], order: u128) -> Best {
    let (lmin, lmax) = extremes(&sub_gram(g, subset));
    Best { delta: isometry_deviation(lmin, lmax), order, subset: subset.to_vec(), lmin, lmax }
}

fn check_order(op: &dyn LinearMap, s: usize) -> Result<()> {
    if s == 0 || s > op.ncols() {
        return Err(Error::InvalidParameter(format!(
            "subset size must be in 1..={}, got {s}",
            op.ncols()
        )));
    }
    Ok(())
}

fn exhaustive(g: &DenseMatrix, n: usize, s: usize, total: u128, record: bool) -> (Best, Option<Vec<SubsetExtremes>>) {
    const CHUNK: u128 = 4096;
    let chunks = total.div_ceil(CHUNK);
    let results: Vec<(Best, Vec<SubsetExtremes>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(total);
            let mut subset = colex_unrank(start, s);
            let mut best: Option<Best> = None;
            let mut rec = Vec::new();
            for order in start..end {
                let cand = evaluate(g, &subset, order);
                if record {
                    rec.push(SubsetExtremes { subset: subset.clone(), lambda_min: cand.lmin, lambda_max: cand.lmax });
                }
                best = Some(match best {
                    None => cand,
                    Some(b) => better(b, cand),
                });
                colex_next(&mut subset, n);
            }
            (best.expect("nonempty chunk"), rec)
        })
        .collect();
    let mut best: Option<Best> = None;
    let mut all = Vec::new();
    for (b, rec) in results {
        best = Some(match best {
            None => b,
            Some(a) => better(a, b),
        });
        all.extend(rec);
    }
    (best.expect("at least one subset"), record.then_some(all))
}

/// Exact `delta_s`: the maximum deviation over all `C(n, s)` column subsets,
/// enumerated in colex order. The witness is the first maximizer.
pub fn rip_exact(op: &dyn LinearMap, s: usize, opts: RipOptions) -> Result<RipReport> {
    check_order(op, s)?;
    let n = op.ncols();
    let total = n_choose_k(n, s);
    if total > opts.budget {
        return Err(Error::BudgetExceeded { subsets: total, budget: opts.budget });
    }
    let g = full_gram(op);
    let (best, per) = exhaustive(&g, n, s, total, opts.record_subsets);
    Ok(RipReport {
        s,
        delta: best.delta,
        mode: RipMode::Exact,
        subsets_evaluated: total,
        witness_subset: best.subset,
        witness_lambda_min: best.lmin,
        witness_lambda_max: best.lmax,
        per_subset_extremes: per,
    })
}

/// Lower bound on `delta_s` from `trials` uniformly sampled subsets; trial
/// `t` draws from stream `seed.derive([t])`. When `trials` reaches `C(n, s)`
/// every subset is evaluated instead, so the result is exact.
pub fn rip_monte_carlo(op: &dyn LinearMap, s: usize, trials: usize, seed: SeedSpec) -> Result<RipReport> {
    check_order(op, s)?;
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let n = op.ncols();
    let total = n_choose_k(n, s);
    let g = full_gram(op);
    let (best, evaluated) = if trials as u128 >= total {
        (exhaustive(&g, n, s, total, false).0, total)
    } else {
        let best = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = seed.derive(&[t as u64]).rng();
                let mut subset = sample_subset(&mut rng, n, s);
                subset.sort_unstable();
                evaluate(&g, &subset, t as u128)
            })
            .reduce_with(better)
            .expect("trials >= 1");
        (best, trials as u128)
    };
    Ok(RipReport {
        s,
        delta: best.delta,
        mode: RipMode::MonteCarlo { trials },
        subsets_evaluated: evaluated,
        witness_subset: best.subset,
        witness_lambda_min: best.lmin,
        witness_lambda_max: best.lmax,
        per_subset_extremes: None,
    })
}
