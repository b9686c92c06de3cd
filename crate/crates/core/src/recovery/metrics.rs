use crate::error::{check_len, Error, Result};
use crate::linalg::norm2;
use crate::signal::SparseSignal;

/// `|x_hat - x| / |x|`, or `|x_hat|` when `x` is zero.
pub fn relative_error(x_true: &SparseSignal, x_hat: &[f64]) -> Result<f64> {
    check_len(x_true.n(), x_hat.len())?;
    let mut diff = x_hat.to_vec();
    for (i, v) in x_true.iter() {
        diff[i] -= v;
    }
    let err = norm2(&diff);
    let scale = x_true.norm2();
    Ok(if scale == 0.0 { err } else { err / scale })
}

pub fn judge_success(x_true: &SparseSignal, x_hat: &[f64], success_rel_tol: f64) -> Result<bool> {
    Ok(relative_error(x_true, x_hat)? <= success_rel_tol)
}

/// `|X - M|_F / |M|_F` over same-shaped images flattened in any fixed order.
pub fn mse_frobenius(x: &[f64], m: &[f64]) -> Result<f64> {
    check_len(m.len(), x.len())?;
    let denom = norm2(m);
    if denom == 0.0 {
        return Err(Error::InvalidParameter("reference image has zero Frobenius norm".into()));
    }
    let num = x.iter().zip(m).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    Ok(num / denom)
}
