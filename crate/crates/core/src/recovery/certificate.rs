use serde::{Deserialize, Serialize};

use crate::error::{check_len, Result};
use crate::linalg::{conjugate_gradient, dot, norm_inf, Cholesky, DenseMatrix};
use crate::operators::LinearMap;

/// Supports up to this size are refit with a dense Cholesky factor; larger
/// ones with matrix-free conjugate gradients.
const DENSE_SUPPORT_MAX: usize = 200;

/// Normal equations `A_S^T A_S z = b` on a fixed column support.
pub(crate) struct SupportSystem {
    pub support: Vec<usize>,
    chol: Option<Cholesky>,
}

impl SupportSystem {
    pub fn new(op: &dyn LinearMap, support: Vec<usize>) -> Option<Self> {
        if support.len() > op.nrows() {
            return None;
        }
        let chol = if support.len() <= DENSE_SUPPORT_MAX {
            let cols: Vec<Vec<f64>> = support.iter().map(|&j| op.column(j)).collect();
            let s = support.len();
            let g = DenseMatrix::from_fn(s, s, |a, b| dot(&cols[a], &cols[b]));
            Some(Cholesky::factor(&g).ok()?)
        } else {
            None
        };
        Some(Self { support, chol })
    }

    /// `A_S z` as a length-`k` vector.
    pub fn forward(&self, op: &dyn LinearMap, z: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; op.ncols()];
        for (&j, &v) in self.support.iter().zip(z) {
            x[j] = v;
        }
        op.forward(&x)
    }

    /// `A_S^T r`
    pub fn adjoint(&self, op: &dyn LinearMap, r: &[f64]) -> Vec<f64> {
        let full = op.adjoint(r);
        self.support.iter().map(|&j| full[j]).collect()
    }

    pub fn solve(&self, op: &dyn LinearMap, b: &[f64]) -> Option<Vec<f64>> {
        match &self.chol {
            Some(ch) => Some(ch.solve(b)),
            None => {
                let (z, rel) =
                    conjugate_gradient(|p| self.adjoint(op, &self.forward(op, p)), b, 1e-14, 2000);
                (rel <= 1e-10).then_some(z)
            }
        }
    }

    /// The point nearest `base` on `{nu : A_S^T nu = signs}`.
    pub fn fit_dual(&self, op: &dyn LinearMap, base: &[f64], signs: &[f64]) -> Option<Vec<f64>> {
        let gap: Vec<f64> = signs.iter().zip(self.adjoint(op, base)).map(|(s, a)| s - a).collect();
        let z = self.solve(op, &gap)?;
        let corr = self.forward(op, &z);
        Some(base.iter().zip(&corr).map(|(b, c)| b + c).collect())
    }
}

/// A dual vector `nu` with `(A^T nu)_S = sign(x_S)`; `x` is l1-optimal among
/// all `z` with `A z = A x` iff such a `nu` also has `|A^T nu|_inf <= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate {
    pub support: Vec<usize>,
    pub nu: Vec<f64>,
    /// `|A^T nu|_inf`
    pub inf_norm: f64,
    /// `|(A^T nu)_S - sign(x_S)|_inf`
    pub equality_residual: f64,
}

impl DualCertificate {
    pub fn holds(&self, tol: f64) -> bool {
        self.inf_norm <= 1.0 + tol && self.equality_residual <= tol
    }
}

/// Least-squares dual fit for `x_hat`: the vector closest to `hint` (or to 0,
/// giving the minimum-norm fit) satisfying the support equalities.
/// Entries below `1e-9 |x_hat|_inf` are treated as off-support.
pub fn dual_certificate(op: &dyn LinearMap, x_hat: &[f64], hint: Option<&[f64]>) -> Result<DualCertificate> {
    check_len(op.ncols(), x_hat.len())?;
    if let Some(h) = hint {
        check_len(op.nrows(), h.len())?;
    }
    let base = hint.map_or_else(|| vec![0.0; op.nrows()], <[f64]>::to_vec);
    let cut = 1e-9 * norm_inf(x_hat);
    let support: Vec<usize> = (0..x_hat.len()).filter(|&j| x_hat[j].abs() > cut && x_hat[j] != 0.0).collect();
    let signs: Vec<f64> = support.iter().map(|&j| x_hat[j].signum()).collect();
    let nu = if support.is_empty() {
        Some(base.clone())
    } else {
        SupportSystem::new(op, support.clone()).and_then(|sys| sys.fit_dual(op, &base, &signs))
    };
    let Some(nu) = nu else {
        return Ok(DualCertificate {
            support,
            nu: base,
            inf_norm: f64::INFINITY,
            equality_residual: f64::INFINITY,
        });
    };
    let w = op.adjoint(&nu);
    let equality_residual = support
        .iter()
        .zip(&signs)
        .map(|(&j, s)| (w[j] - s).abs())
        .fold(0.0, f64::max);
    Ok(DualCertificate { support, inf_norm: norm_inf(&w), equality_residual, nu })
}
