//! Structured k x n measurement operators.
//!
//! Entry rules, written 1-based as in the usual matrix displays:
//!
//! * `toeplitz`: `A[i][j] = a_{n+i-j}` over a generator of length `n+k-1`
//!   (row 1 is `a_n, ..., a_1`).
//! * `sym_toeplitz`: `A[i][j] = a_{n-|i-j|}` over `n` generator entries.
//! * `left_sym_toeplitz`: `A[i][j] = a_{r(i+j-1)}` with `r(s) = s` for
//!   `s <= n` and `r(s) = 2n - s` otherwise.
//! * `iid_dense`: an explicit row-major `k*n` matrix.
//!
//! The symmetric kinds may instead keep only the rows `theta` of their full
//! `n x n` extension. Any kind may be right-composed with the first-order
//! differencing operator `D`.
//!
//! Internally every structured kind is a Hankel slice `A[r][j] = seq[r + j']`
//! where `j' = n-1-j` for the Toeplitz kinds and `j' = j` for the
//! left-shifted kind. Everything is 0-based in code.

mod differencing;
mod fast;

use serde::{Deserialize, Serialize};

pub use differencing::{build_d, build_l, cumulative_sum, difference, difference_adjoint};

use crate::error::{check_len, Error, Result};
use crate::linalg::DenseMatrix;
use crate::randgen::{DistributionSpec, EntrySampler, SeedSpec};
use fast::CirculantPlan;

/// Below this many columns `apply` uses direct sliding dot products instead
/// of the circulant FFT embedding.
pub const DEFAULT_FAST_THRESHOLD: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    IidDense,
    Toeplitz,
    SymToeplitz,
    LeftSymToeplitz,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 4] = [
        OperatorKind::IidDense,
        OperatorKind::Toeplitz,
        OperatorKind::SymToeplitz,
        OperatorKind::LeftSymToeplitz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::IidDense => "iid_dense",
            OperatorKind::Toeplitz => "toeplitz",
            OperatorKind::SymToeplitz => "sym_toeplitz",
            OperatorKind::LeftSymToeplitz => "left_sym_toeplitz",
        }
    }

    pub fn is_symmetric(self) -> bool {
        matches!(self, OperatorKind::SymToeplitz | OperatorKind::LeftSymToeplitz)
    }

    /// Number of generator scalars a k x n operator of this kind needs.
    pub fn generator_len(self, k: usize, n: usize) -> usize {
        match self {
            OperatorKind::IidDense => k * n,
            OperatorKind::Toeplitz => n + k - 1,
            OperatorKind::SymToeplitz | OperatorKind::LeftSymToeplitz => n,
        }
    }
}

impl std::fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OperatorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown operator kind {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSource {
    Explicit(Vec<f64>),
    Random { dist: DistributionSpec, seed: SeedSpec },
}

/// Serialized form of an operator. Random operators are stored by their
/// distribution and seed, explicit ones by their generator array. `theta`
/// is 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorDescriptor {
    pub kind: OperatorKind,
    pub k: usize,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist: Option<DistributionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<SeedSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<usize>>,
    #[serde(default, rename = "compose_D")]
    pub compose_d: bool,
}

/// Anything that can be applied forward and adjoint. Solvers only need this.
pub trait LinearMap: Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn forward(&self, x: &[f64]) -> Vec<f64>;
    fn adjoint(&self, y: &[f64]) -> Vec<f64>;

    fn column(&self, j: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.ncols()];
        e[j] = 1.0;
        self.forward(&e)
    }
}

impl LinearMap for DenseMatrix {
    fn nrows(&self) -> usize {
        self.rows()
    }
    fn ncols(&self) -> usize {
        self.cols()
    }
    fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.matvec(x)
    }
    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        self.matvec_transpose(y)
    }
    fn column(&self, j: usize) -> Vec<f64> {
        DenseMatrix::column(self, j)
    }
}

#[derive(Debug, Clone)]
struct HankelSlice {
    n: usize,
    /// Rows of the full structure (k, or n when a row subset is taken).
    full_rows: usize,
    /// `seq.len() == n + full_rows - 1`
    seq: Vec<f64>,
    /// Generator index behind each `seq` entry.
    seq_source: Vec<usize>,
    flip: bool,
    rows: Option<Vec<usize>>,
    plan: Option<CirculantPlan>,
}

impl HankelSlice {
    fn out_rows(&self) -> usize {
        self.rows.as_ref().map_or(self.full_rows, Vec::len)
    }

    #[inline]
    fn full_row(&self, i: usize) -> usize {
        self.rows.as_ref().map_or(i, |r| r[i])
    }

    #[inline]
    fn seq_pos(&self, i: usize, j: usize) -> usize {
        let jp = if self.flip { self.n - 1 - j } else { j };
        self.full_row(i) + jp
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        if let Some(plan) = &self.plan {
            // y[r] = (seq * v)[r + n - 1] with v = x (Toeplitz) or reversed x.
            let v: Vec<f64> = if self.flip { x.to_vec() } else { x.iter().rev().copied().collect() };
            let conv = plan.convolve(&v);
            (0..self.out_rows()).map(|i| conv[self.full_row(i) + self.n - 1]).collect()
        } else {
            let u: Vec<f64> = if self.flip { x.iter().rev().copied().collect() } else { x.to_vec() };
            (0..self.out_rows())
                .map(|i| {
                    let r = self.full_row(i);
                    crate::linalg::dot(&self.seq[r..r + self.n], &u)
                })
                .collect()
        }
    }

    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        let mut w = vec![0.0; self.full_rows];
        for (i, &yi) in y.iter().enumerate() {
            w[self.full_row(i)] += yi;
        }
        // z[j'] = sum_r seq[r + j'] w[r]
        let z: Vec<f64> = if let Some(plan) = &self.plan {
            let wr: Vec<f64> = w.iter().rev().copied().collect();
            let conv = plan.convolve(&wr);
            (0..self.n).map(|jp| conv[jp + self.full_rows - 1]).collect()
        } else {
            (0..self.n)
                .map(|jp| crate::linalg::dot(&self.seq[jp..jp + self.full_rows], &w))
                .collect()
        };
        if self.flip {
            z.into_iter().rev().collect()
        } else {
            z
        }
    }
}

#[derive(Debug, Clone)]
enum Engine {
    Dense(DenseMatrix),
    Hankel(HankelSlice),
}

/// An immutable k x n measurement operator.
#[derive(Debug, Clone)]
pub struct MeasurementOperator {
    kind: OperatorKind,
    k: usize,
    n: usize,
    generator: Vec<f64>,
    theta: Option<Vec<usize>>,
    compose_d: bool,
    random: Option<(DistributionSpec, SeedSpec)>,
    independent_draws: usize,
    engine: Engine,
}

impl MeasurementOperator {
    /// Builds an operator of `kind`. `theta` (0-based, sorted, distinct,
    /// `|theta| = k`) selects rows of the full `n x n` symmetric extension.
    pub fn build(
        kind: OperatorKind,
        k: usize,
        n: usize,
        source: GeneratorSource,
        theta: Option<Vec<usize>>,
    ) -> Result<Self> {
        Self::build_with_threshold(kind, k, n, source, theta, DEFAULT_FAST_THRESHOLD)
    }

    pub fn build_with_threshold(
        kind: OperatorKind,
        k: usize,
        n: usize,
        source: GeneratorSource,
        theta: Option<Vec<usize>>,
        fast_threshold: usize,
    ) -> Result<Self> {
        if k == 0 || n == 0 || k > n {
            return Err(Error::InvalidParameter(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
        }
        if let Some(t) = &theta {
            if !kind.is_symmetric() {
                return Err(Error::InvalidParameter(format!(
                    "row subsets are only defined for symmetric kinds, not {kind}"
                )));
            }
            check_len(k, t.len())?;
            if t.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidParameter("theta must be sorted and distinct".into()));
            }
            if t.last().is_some_and(|&l| l >= n) {
                return Err(Error::InvalidParameter("theta index out of range".into()));
            }
        }
        let expected = kind.generator_len(k, n);
        let (generator, random, independent_draws) = match source {
            GeneratorSource::Explicit(g) => {
                check_len(expected, g.len())?;
                if g.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite("generator"));
                }
                let len = g.len();
                (g, None, len)
            }
            GeneratorSource::Random { dist, seed } => {
                let mut sampler = EntrySampler::new(dist, seed);
                let g = sampler.fill(expected);
                (g, Some((dist, seed)), sampler.draws())
            }
        };
        let engine = match kind {
            OperatorKind::IidDense => Engine::Dense(DenseMatrix::from_row_major(k, n, generator.clone())?),
            _ => {
                let full_rows = if theta.is_some() { n } else { k };
                let len = n + full_rows - 1;
                let (flip, seq_source): (bool, Vec<usize>) = match kind {
                    OperatorKind::Toeplitz => (true, (0..len).collect()),
                    OperatorKind::SymToeplitz => {
                        (true, (0..len).map(|t| n - 1 - t.abs_diff(n - 1)).collect())
                    }
                    OperatorKind::LeftSymToeplitz => {
                        (false, (0..len).map(|t| if t < n { t } else { 2 * n - 2 - t }).collect())
                    }
                    OperatorKind::IidDense => unreachable!(),
                };
                let seq: Vec<f64> = seq_source.iter().map(|&s| generator[s]).collect();
                let plan = (n >= fast_threshold).then(|| CirculantPlan::new(&seq, len));
                Engine::Hankel(HankelSlice { n, full_rows, seq, seq_source, flip, rows: theta.clone(), plan })
            }
        };
        Ok(Self { kind, k, n, generator, theta, compose_d: false, random, independent_draws, engine })
    }

    pub fn random(
        kind: OperatorKind,
        k: usize,
        n: usize,
        dist: DistributionSpec,
        seed: SeedSpec,
    ) -> Result<Self> {
        Self::build(kind, k, n, GeneratorSource::Random { dist, seed }, None)
    }

    pub fn explicit(kind: OperatorKind, k: usize, n: usize, generator: Vec<f64>) -> Result<Self> {
        Self::build(kind, k, n, GeneratorSource::Explicit(generator), None)
    }

    pub fn from_dense(m: &DenseMatrix) -> Result<Self> {
        Self::explicit(OperatorKind::IidDense, m.rows(), m.cols(), m.as_slice().to_vec())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_dense(&DenseMatrix::identity(n)).expect("identity is well formed")
    }

    /// Right-composes with the differencing operator: the result applies
    /// `x -> A (D x)`.
    pub fn compose_with_d(mut self) -> Self {
        self.compose_d = true;
        self
    }

    /// The same operator without the right composition by `D`.
    pub fn without_d(&self) -> Self {
        let mut op = self.clone();
        op.compose_d = false;
        op
    }

    pub fn from_descriptor(d: &OperatorDescriptor) -> Result<Self> {
        let source = match (&d.generator, d.dist, d.seed) {
            (Some(g), None, None) => GeneratorSource::Explicit(g.clone()),
            (None, Some(dist), Some(seed)) => GeneratorSource::Random { dist, seed },
            _ => {
                return Err(Error::InvalidParameter(
                    "descriptor needs either a generator array or both dist and seed".into(),
                ))
            }
        };
        let op = Self::build(d.kind, d.k, d.n, source, d.theta.clone())?;
        Ok(if d.compose_d { op.compose_with_d() } else { op })
    }

    pub fn descriptor(&self) -> OperatorDescriptor {
        let (generator, dist, seed) = match self.random {
            Some((dist, seed)) => (None, Some(dist), Some(seed)),
            None => (Some(self.generator.clone()), None, None),
        };
        OperatorDescriptor {
            kind: self.kind,
            k: self.k,
            n: self.n,
            generator,
            dist,
            seed,
            theta: self.theta.clone(),
            compose_d: self.compose_d,
        }
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generator(&self) -> &[f64] {
        &self.generator
    }

    pub fn theta(&self) -> Option<&[usize]> {
        self.theta.as_deref()
    }

    pub fn composes_d(&self) -> bool {
        self.compose_d
    }

    /// Scalars drawn from the entry distribution (or supplied explicitly)
    /// to build this operator.
    pub fn independent_draws(&self) -> usize {
        self.independent_draws
    }

    pub fn uses_fast_path(&self) -> bool {
        matches!(&self.engine, Engine::Hankel(h) if h.plan.is_some())
    }

    /// Entry of the underlying operator `A` (ignoring any `D`), 0-based.
    pub fn base_entry(&self, i: usize, j: usize) -> f64 {
        match &self.engine {
            Engine::Dense(m) => m[(i, j)],
            Engine::Hankel(h) => h.seq[h.seq_pos(i, j)],
        }
    }

    /// Index into `generator()` of the variable behind entry `(i, j)` of `A`.
    pub fn generator_index(&self, i: usize, j: usize) -> usize {
        match &self.engine {
            Engine::Dense(_) => i * self.n + j,
            Engine::Hankel(h) => h.seq_source[h.seq_pos(i, j)],
        }
    }

    /// Entry `(i, j)` of the operator as applied (including `D`).
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if self.compose_d {
            let next = if j + 1 < self.n { self.base_entry(i, j + 1) } else { 0.0 };
            self.base_entry(i, j) - next
        } else {
            self.base_entry(i, j)
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.k, self.n, |i, j| self.entry(i, j))
    }

    pub fn column_vec(&self, j: usize) -> Vec<f64> {
        (0..self.k).map(|i| self.entry(i, j)).collect()
    }

    pub fn column_sq_norms(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for i in 0..self.k {
            for (j, o) in out.iter_mut().enumerate() {
                let v = self.entry(i, j);
                *o += v * v;
            }
        }
        out
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n, x.len())?;
        Ok(self.forward(x))
    }

    pub fn apply_adjoint(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len(self.k, y.len())?;
        Ok(self.adjoint(y))
    }

    fn base_forward(&self, x: &[f64]) -> Vec<f64> {
        match &self.engine {
            Engine::Dense(m) => m.matvec(x),
            Engine::Hankel(h) => h.forward(x),
        }
    }

    fn base_adjoint(&self, y: &[f64]) -> Vec<f64> {
        match &self.engine {
            Engine::Dense(m) => m.matvec_transpose(y),
            Engine::Hankel(h) => h.adjoint(y),
        }
    }
}

impl LinearMap for MeasurementOperator {
    fn nrows(&self) -> usize {
        self.k
    }

    fn ncols(&self) -> usize {
        self.n
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        if self.compose_d {
            self.base_forward(&difference(x))
        } else {
            self.base_forward(x)
        }
    }

    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        let z = self.base_adjoint(y);
        if self.compose_d {
            difference_adjoint(&z)
        } else {
            z
        }
    }

    fn column(&self, j: usize) -> Vec<f64> {
        self.column_vec(j)
    }
}

impl Serialize for MeasurementOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.descriptor().serialize(s)
    }
}

impl<'de> Deserialize<'de> for MeasurementOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let desc = OperatorDescriptor::deserialize(d)?;
        Self::from_descriptor(&desc).map_err(serde::de::Error::custom)
    }
}

/// Monte Carlo check that squared column norms equal 1 in expectation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColumnNormReport {
    pub replications: usize,
    pub mean_sq_norm: Vec<f64>,
    pub std_error: Vec<f64>,
    /// Columns whose mean lies more than 3 standard errors from 1.
    pub failing_columns: Vec<usize>,
    pub passed: bool,
}

/// Regenerates the operator `replications` times (stream `r` derived from
/// `seed`) and tests each column's mean squared norm against 1 at three
/// standard errors. Columns with zero spread pass iff their mean is 1 to
/// rounding.
pub fn column_norm_expectation_check(
    kind: OperatorKind,
    k: usize,
    n: usize,
    theta: Option<Vec<usize>>,
    dist: DistributionSpec,
    replications: usize,
    seed: SeedSpec,
) -> Result<ColumnNormReport> {
    if replications < 2 {
        return Err(Error::InvalidParameter("need at least 2 replications".into()));
    }
    let mut sum = vec![0.0; n];
    let mut sum_sq = vec![0.0; n];
    for r in 0..replications {
        let op = MeasurementOperator::build(
            kind,
            k,
            n,
            GeneratorSource::Random { dist, seed: seed.derive(&[r as u64]) },
            theta.clone(),
        )?;
        for (j, v) in op.column_sq_norms().into_iter().enumerate() {
            sum[j] += v;
            sum_sq[j] += v * v;
        }
    }
    let rr = replications as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / rr).collect();
    let se: Vec<f64> = sum_sq
        .iter()
        .zip(&mean)
        .map(|(ss, m)| ((ss / rr - m * m).max(0.0) * rr / (rr - 1.0)).sqrt() / rr.sqrt())
        .collect();
    let failing_columns: Vec<usize> = (0..n)
        .filter(|&j| (mean[j] - 1.0).abs() > (3.0 * se[j]).max(1e-12))
        .collect();
    Ok(ColumnNormReport {
        replications,
        passed: failing_columns.is_empty(),
        mean_sq_norm: mean,
        std_error: se,
        failing_columns,
    })
}
