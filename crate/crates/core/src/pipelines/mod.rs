//! Application workflows: identifying a sparse FIR impulse response with a
//! symmetric probe, and recovering piecewise-constant signals through the
//! factorization `(A D) L = A`.
//!
//! Signal time is 0-based. A probe of free length `n` excites a system with
//! response `x` of length `n`; the `k` measurements are the samples of the
//! full linear convolution at lags `n-1 ..= n+k-2`.

mod io;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::operators::cumulative_sum;
use crate::operators::{MeasurementOperator, OperatorKind};
use crate::randgen::{draw_sequence, sample_subset, DistributionSpec, SeedSpec};
use crate::recovery::{basis_pursuit, judge_success, relative_error, RecoveryResult, SolverConfig};
use crate::signal::SparseSignal;

pub use io::{read_vector_csv, write_vector_csv};

/// Probe `a[0..n+k-1]` symmetric about `n-1`. Only the free part
/// `a[0..n]` is stored; the tail is always derived from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSequence {
    k: usize,
    free: Vec<f64>,
}

impl ProbeSequence {
    pub fn new(free: Vec<f64>, k: usize) -> Result<Self> {
        if k == 0 || k > free.len() {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= k <= n, got k = {k}, n = {}",
                free.len()
            )));
        }
        if free.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("probe"));
        }
        Ok(Self { k, free })
    }

    pub fn n(&self) -> usize {
        self.free.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn free_part(&self) -> &[f64] {
        &self.free
    }

    pub fn get(&self, t: usize) -> f64 {
        let n = self.free.len();
        assert!(t < n + self.k - 1, "probe index {t} out of range");
        if t < n {
            self.free[t]
        } else {
            self.free[2 * (n - 1) - t]
        }
    }

    pub fn full(&self) -> Vec<f64> {
        (0..self.n() + self.k - 1).map(|t| self.get(t)).collect()
    }

    /// The `k x n` symmetric Toeplitz operator whose product with `x` is the
    /// measured window of `probe * x`.
    pub fn operator(&self) -> MeasurementOperator {
        MeasurementOperator::explicit(OperatorKind::SymToeplitz, self.k, self.n(), self.free.clone())
            .expect("probe dimensions validated at construction")
    }
}

pub fn make_probe(n: usize, k: usize, dist: DistributionSpec, seed: SeedSpec) -> Result<ProbeSequence> {
    if k > n {
        return Err(Error::InvalidParameter(format!("need k <= n, got k = {k}, n = {n}")));
    }
    ProbeSequence::new(draw_sequence(dist, n, seed)?, k)
}

/// Full linear convolution of the probe with `x`, sampled at lags
/// `n-1 ..= n+k-2`.
pub fn convolve_and_measure(probe: &ProbeSequence, x: &SparseSignal) -> Result<Vec<f64>> {
    check_len(probe.n(), x.n())?;
    let n = probe.n();
    let mut y = vec![0.0; probe.k()];
    for (i, yi) in y.iter_mut().enumerate() {
        let lag = n - 1 + i;
        *yi = x.iter().map(|(j, v)| probe.get(lag - j) * v).sum();
    }
    Ok(y)
}

pub fn identify_system(probe: &ProbeSequence, y: &[f64], cfg: &SolverConfig) -> Result<RecoveryResult> {
    basis_pursuit(&probe.operator(), y, cfg)
}

/// `x = L theta`; `theta[0]` is the initial level, every other nonzero
/// entry a jump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PwcSignal {
    pub x: Vec<f64>,
    pub theta: SparseSignal,
}

impl PwcSignal {
    pub fn from_theta(theta: SparseSignal) -> Self {
        Self { x: cumulative_sum(&theta.to_dense()), theta }
    }

    pub fn pieces(&self) -> usize {
        self.theta.sparsity()
    }
}

/// Random `m`-piece signal: nonzero initial level plus `m-1` jumps at
/// uniform positions, each of magnitude in `[0.5, 1.5)` with random sign.
pub fn make_pwc(n: usize, m: usize, seed: SeedSpec) -> Result<PwcSignal> {
    if n == 0 || m == 0 || m > n {
        return Err(Error::InvalidParameter(format!("need 1 <= m <= n, got m = {m}, n = {n}")));
    }
    use rand::Rng;
    let mut rng = seed.rng();
    let mut support = vec![0];
    support.extend(sample_subset(&mut rng, n - 1, m - 1).into_iter().map(|j| j + 1));
    support.sort_unstable();
    let values = (0..m)
        .map(|_| {
            let mag = 0.5 + rng.random::<f64>();
            if rng.random::<bool>() {
                mag
            } else {
                -mag
            }
        })
        .collect();
    Ok(PwcSignal::from_theta(SparseSignal::new(n, support, values)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PwcRecovery {
    pub theta_hat: Vec<f64>,
    pub x_hat: Vec<f64>,
    pub result: RecoveryResult,
}

/// `y = A_L x` with `A_L = A D`. Since `A_L L = A`, the jumps are
/// recovered against `A` and integrated back.
pub fn recover_pwc(op_al: &MeasurementOperator, y: &[f64], cfg: &SolverConfig) -> Result<PwcRecovery> {
    if !op_al.composes_d() {
        return Err(Error::InvalidParameter("recover_pwc expects an operator composed with D".into()));
    }
    let a = op_al.without_d();
    let result = basis_pursuit(&a, y, cfg)?;
    let theta_hat = result.x_hat.clone();
    Ok(PwcRecovery { x_hat: cumulative_sum(&theta_hat), theta_hat, result })
}

/// JSON-ready outcome of one pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSummary {
    pub pipeline: String,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub relative_error: f64,
    pub success: bool,
    pub iters: usize,
    pub residual: f64,
    pub certified: bool,
}

impl PipelineSummary {
    pub fn new(pipeline: &str, truth: &SparseSignal, k: usize, result: &RecoveryResult, cfg: &SolverConfig) -> Result<Self> {
        Ok(Self {
            pipeline: pipeline.to_string(),
            n: truth.n(),
            k,
            m: truth.sparsity(),
            relative_error: relative_error(truth, &result.x_hat)?,
            success: judge_success(truth, &result.x_hat, cfg.success_rel_tol)?,
            iters: result.iters,
            residual: result.residual,
            certified: result.certified,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randgen::DistKind;

    #[test]
    fn mirror_tail() {
        let p = ProbeSequence::new(vec![1.0, 2.0, 3.0, 4.0], 3).unwrap();
        assert_eq!(p.full(), vec![1.0, 2.0, 3.0, 4.0, 3.0, 2.0]);
        let p = ProbeSequence::new(vec![1.0, 2.0, 3.0, 4.0], 1).unwrap();
        assert_eq!(p.full(), vec![1.0, 2.0, 3.0, 4.0]);
        assert!(ProbeSequence::new(vec![1.0, 2.0], 3).is_err());
    }

    #[test]
    fn second_column_measurement() {
        let p = ProbeSequence::new(vec![1.0, 2.0, 3.0, 4.0], 2).unwrap();
        let x = SparseSignal::new(4, vec![1], vec![1.0]).unwrap();
        assert_eq!(convolve_and_measure(&p, &x).unwrap(), vec![3.0, 4.0]);
        let e0 = SparseSignal::new(4, vec![0], vec![1.0]).unwrap();
        assert_eq!(convolve_and_measure(&p, &e0).unwrap(), vec![4.0, 3.0]);
    }

    #[test]
    fn pwc_pieces() {
        let s = make_pwc(50, 5, SeedSpec::new(1, 2)).unwrap();
        assert_eq!(s.pieces(), 5);
        assert_eq!(s.theta.support()[0], 0);
        let breaks = (1..50).filter(|&i| s.x[i] != s.x[i - 1]).count();
        assert_eq!(breaks + 1, 5);
        assert!(make_pwc(5, 6, SeedSpec::default()).is_err());
    }

    #[test]
    fn recover_pwc_requires_d() {
        let dist = DistributionSpec::new(DistKind::Gaussian, 4).unwrap();
        let op = MeasurementOperator::random(OperatorKind::SymToeplitz, 4, 8, dist, SeedSpec::default()).unwrap();
        assert!(recover_pwc(&op, &[0.0; 4], &SolverConfig::default()).is_err());
    }
}
