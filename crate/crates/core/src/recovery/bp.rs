//! Basis pursuit, `min |x|_1 s.t. A x = y`, by first-order primal-dual
//! splitting (Chambolle-Pock):
//!
//! ```text
//! nu   <- nu + sigma (A xbar - y)
//! x'   <- soft(x - tau A^T nu, tau)
//! xbar <- 2 x' - x
//! ```
//!
//! with `tau sigma |A|^2 < 1`. Only `forward` and `adjoint` are used, so
//! structured operators keep their fast path. Periodically the current
//! support is refit by least squares; the refit is returned as soon as it is
//! feasible and a least-squares correction of the running dual proves it
//! optimal.
//!
//! Square systems are solved directly first: if `A x = y` is solvable and
//! `A^T nu = sign(x)` has a solution too, `x` is optimal.

use super::certificate::SupportSystem;
use super::{RecoveryResult, SolverConfig, TracePoint};
use crate::error::{check_len, Error, Result};
use crate::linalg::{cgls, norm1, norm2, norm_inf, sub};
use crate::operators::LinearMap;

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Power iteration on `A^T A` from a fixed start vector.
pub(crate) fn operator_norm_estimate(op: &dyn LinearMap, iters: usize) -> f64 {
    let n = op.ncols();
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * (i % 7) as f64).collect();
    let mut est = 0.0;
    for _ in 0..iters {
        let nv = norm2(&v);
        if nv == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        let w = op.adjoint(&op.forward(&v));
        let next = norm2(&w).sqrt();
        let done = (next - est).abs() <= 1e-9 * next;
        est = next;
        v = w;
        if done {
            break;
        }
    }
    est
}

struct Polisher {
    last_support: Vec<usize>,
    tried: Option<Vec<usize>>,
}

impl Polisher {
    /// Refit on the support of `x`; returns the refit and its certifying
    /// dual when both checks pass.
    fn attempt(
        &mut self,
        op: &dyn LinearMap,
        y: &[f64],
        y_norm: f64,
        x: &[f64],
        nu: &[f64],
        cfg: &SolverConfig,
    ) -> Option<(Vec<f64>, Vec<f64>)> {
        let support: Vec<usize> = (0..x.len()).filter(|&j| x[j] != 0.0).collect();
        let stable = support == self.last_support;
        self.last_support = support.clone();
        if support.is_empty() || support.len() > op.nrows() || !stable {
            return None;
        }
        if self.tried.as_ref() == Some(&support) {
            return None;
        }
        self.tried = Some(support.clone());
        let sys = SupportSystem::new(op, support)?;
        let z = sys.solve(op, &sys.adjoint(op, y))?;
        let zmax = norm_inf(&z);
        if z.iter().any(|v| v.abs() <= 1e-12 * zmax) {
            return None;
        }
        let mut xp = vec![0.0; x.len()];
        for (&j, &v) in sys.support.iter().zip(&z) {
            xp[j] = v;
        }
        if norm2(&sub(&op.forward(&xp), y)) > cfg.feas_tol * y_norm {
            return None;
        }
        // The splitting's dual variable carries the opposite sign.
        let base: Vec<f64> = nu.iter().map(|v| -v).collect();
        let signs: Vec<f64> = z.iter().map(|v| v.signum()).collect();
        let dual = sys.fit_dual(op, &base, &signs)?;
        if norm_inf(&op.adjoint(&dual)) <= 1.0 + cfg.dual_tol {
            Some((xp, dual))
        } else {
            // Same support may certify later with a better dual.
            self.tried = None;
            None
        }
    }
}

fn square_solve(op: &dyn LinearMap, y: &[f64], y_norm: f64, cfg: &SolverConfig) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = op.ncols();
    let budget = (4 * n).max(1000);
    let (x, _) = cgls(|v| op.forward(v), |v| op.adjoint(v), y, 1e-14, budget);
    if norm2(&sub(&op.forward(&x), y)) > cfg.feas_tol * y_norm {
        return None;
    }
    let signs: Vec<f64> = x.iter().map(|&v| if v == 0.0 { 0.0 } else { v.signum() }).collect();
    let (nu, _) = cgls(|v| op.adjoint(v), |v| op.forward(v), &signs, 1e-14, budget);
    let g = op.adjoint(&nu);
    let ok = g.iter().zip(&signs).all(|(a, s)| (a - s).abs() <= cfg.dual_tol.max(1e-6));
    ok.then_some((x, nu))
}

pub fn basis_pursuit(op: &dyn LinearMap, y: &[f64], cfg: &SolverConfig) -> Result<RecoveryResult> {
    check_len(op.nrows(), y.len())?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("y"));
    }
    if !(cfg.feas_tol > 0.0 && cfg.change_tol > 0.0 && cfg.step_ratio > 0.0 && cfg.max_iters > 0) {
        return Err(Error::InvalidParameter("solver tolerances and budgets must be positive".into()));
    }
    let n = op.ncols();
    let k = op.nrows();
    let y_norm = norm2(y);
    let finish = |x: Vec<f64>, iters, converged, certified, dual, trace| {
        let residual = norm2(&sub(&op.forward(&x), y));
        RecoveryResult {
            iters,
            residual,
            l1_value: norm1(&x),
            converged,
            certified,
            success: None,
            dual,
            trace,
            x_hat: x,
        }
    };
    if y_norm == 0.0 {
        return Ok(finish(vec![0.0; n], 0, true, true, Some(vec![0.0; k]), cfg.trace.then(Vec::new)));
    }

    if k == n {
        if let Some((x, dual)) = square_solve(op, y, y_norm, cfg) {
            return Ok(finish(x, 0, true, true, Some(dual), cfg.trace.then(Vec::new)));
        }
    }

    let norm = cfg.norm_estimate.unwrap_or_else(|| 1.02 * operator_norm_estimate(op, 100));
    if !(norm > 0.0) {
        return Err(Error::InvalidParameter("operator is zero".into()));
    }
    let tau = 0.99 * cfg.step_ratio / norm;
    let sigma = 0.99 / (cfg.step_ratio * norm);

    let mut x = vec![0.0; n];
    let mut ax = vec![0.0; k];
    let mut a_xbar = vec![0.0; k];
    let mut nu = vec![0.0; k];
    let mut trace = cfg.trace.then(Vec::new);
    let mut polisher = Polisher { last_support: Vec::new(), tried: None };

    for it in 1..=cfg.max_iters {
        for ((v, a), b) in nu.iter_mut().zip(&a_xbar).zip(y) {
            *v += sigma * (a - b);
        }
        let g = op.adjoint(&nu);
        let x_new: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| soft_threshold(xi - tau * gi, tau)).collect();
        let ax_new = op.forward(&x_new);
        for ((ab, an), ao) in a_xbar.iter_mut().zip(&ax_new).zip(&ax) {
            *ab = 2.0 * an - ao;
        }
        let change = norm2(&sub(&x_new, &x)) / norm2(&x_new).max(f64::MIN_POSITIVE);
        x = x_new;
        ax = ax_new;
        let rel_res = norm2(&sub(&ax, y)) / y_norm;
        if let Some(t) = trace.as_mut() {
            t.push(TracePoint { iter: it, residual: rel_res * y_norm, l1_value: norm1(&x) });
        }
        if rel_res <= cfg.feas_tol && change <= cfg.change_tol {
            let dual = nu.iter().map(|v| -v).collect();
            return Ok(finish(x, it, true, false, Some(dual), trace));
        }
        if cfg.polish_every > 0 && it % cfg.polish_every == 0 {
            if let Some((xp, dual)) = polisher.attempt(op, y, y_norm, &x, &nu, cfg) {
                return Ok(finish(xp, it, true, true, Some(dual), trace));
            }
        }
    }
    let dual = nu.iter().map(|v| -v).collect();
    Ok(finish(x, cfg.max_iters, false, false, Some(dual), trace))
}
