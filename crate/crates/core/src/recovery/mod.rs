//! Sparse recovery: l1 basis pursuit by primal-dual splitting, orthogonal
//! matching pursuit as an independent greedy cross-check, and the success
//! and error metrics used by the experiments.

mod bp;
mod certificate;
mod metrics;
mod omp;

use serde::{Deserialize, Serialize};

pub use bp::basis_pursuit;
pub use certificate::{dual_certificate, DualCertificate};
pub use metrics::{judge_success, mse_frobenius, relative_error};
pub use omp::omp;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Target on `|A x - y| / |y|`.
    pub feas_tol: f64,
    /// Target on the relative change between consecutive iterates.
    pub change_tol: f64,
    /// Primal/dual step balance: `tau = 0.99 r / L`, `sigma = 0.99 / (r L)`
    /// with `L` the operator norm estimate.
    pub step_ratio: f64,
    /// Overrides the power-iteration estimate of `|A|_2`.
    pub norm_estimate: Option<f64>,
    /// Attempt a support refit with a dual certificate every this many
    /// iterations; 0 disables it.
    pub polish_every: usize,
    /// Slack on `|A^T nu|_inf <= 1` when certifying a refit.
    pub dual_tol: f64,
    /// Closed threshold on `|x_hat - x| / |x|` for declaring success.
    pub success_rel_tol: f64,
    pub trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 20_000,
            feas_tol: 1e-8,
            change_tol: 1e-10,
            step_ratio: 1.0,
            norm_estimate: None,
            polish_every: 20,
            dual_tol: 1e-9,
            success_rel_tol: 1e-3,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iter: usize,
    pub residual: f64,
    pub l1_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub x_hat: Vec<f64>,
    pub iters: usize,
    /// `|A x_hat - y|_2`, recomputed from `x_hat`.
    pub residual: f64,
    pub l1_value: f64,
    pub converged: bool,
    /// Optimality was proven by a dual vector (basis pursuit only).
    pub certified: bool,
    /// Set by callers that know the ground truth.
    pub success: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TracePoint>>,
}

impl RecoveryResult {
    pub fn relative_residual(&self, y_norm: f64) -> f64 {
        if y_norm == 0.0 {
            self.residual
        } else {
            self.residual / y_norm
        }
    }

    /// Writes the trace as `iteration,residual,l1_value` lines.
    pub fn trace_csv(&self) -> Option<String> {
        self.trace.as_ref().map(|t| {
            let mut s = String::from("iteration,residual,l1_value\n");
            for p in t {
                s.push_str(&format!("{},{:e},{:e}\n", p.iter, p.residual, p.l1_value));
            }
            s
        })
    }
}
