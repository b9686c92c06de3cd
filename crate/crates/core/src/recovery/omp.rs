use super::RecoveryResult;
use crate::error::{check_len, Error, Result};
use crate::linalg::{axpy, dot, norm1, norm2, sub, Cholesky, DenseMatrix};
use crate::operators::LinearMap;

/// Orthogonal matching pursuit: adds the column most correlated with the
/// residual, refits by least squares on the support (Cholesky of the
/// support Gram matrix), and stops at `|r| <= residual_tol |y|` or after
/// `m_max` atoms.
pub fn omp(op: &dyn LinearMap, y: &[f64], m_max: usize, residual_tol: f64) -> Result<RecoveryResult> {
    check_len(op.nrows(), y.len())?;
    if m_max == 0 || m_max > op.nrows() {
        return Err(Error::InvalidParameter(format!(
            "m_max must be in 1..={}, got {m_max}",
            op.nrows()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("y"));
    }
    let n = op.ncols();
    let y_norm = norm2(y);
    let mut x = vec![0.0; n];
    let mut residual = y.to_vec();
    let mut support: Vec<usize> = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let target = residual_tol * y_norm;
    while support.len() < m_max && norm2(&residual) > target {
        let corr = op.adjoint(&residual);
        let mut best: Option<(usize, f64)> = None;
        for (j, c) in corr.iter().enumerate() {
            if support.contains(&j) {
                continue;
            }
            if best.is_none_or(|(_, b)| c.abs() > b) {
                best = Some((j, c.abs()));
            }
        }
        let Some((j, c)) = best else { break };
        if c <= 1e-14 * y_norm {
            break;
        }
        support.push(j);
        columns.push(op.column(j));
        let s = support.len();
        let gram = DenseMatrix::from_fn(s, s, |a, b| dot(&columns[a], &columns[b]));
        let Ok(ch) = Cholesky::factor(&gram) else {
            support.pop();
            columns.pop();
            break;
        };
        let rhs: Vec<f64> = columns.iter().map(|c| dot(c, y)).collect();
        let z = ch.solve(&rhs);
        let mut fit = vec![0.0; y.len()];
        for (c, &zi) in columns.iter().zip(&z) {
            axpy(zi, c, &mut fit);
        }
        residual = sub(y, &fit);
        x.iter_mut().for_each(|v| *v = 0.0);
        for (&j, &zi) in support.iter().zip(&z) {
            x[j] = zi;
        }
    }
    let res = norm2(&sub(&op.forward(&x), y));
    Ok(RecoveryResult {
        iters: support.len(),
        residual: res,
        l1_value: norm1(&x),
        converged: res <= target.max(f64::MIN_POSITIVE) || y_norm == 0.0,
        certified: false,
        success: None,
        dual: None,
        trace: None,
        x_hat: x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{MeasurementOperator, OperatorKind};
    use crate::randgen::{draw_rademacher_spikes, DistKind, DistributionSpec, SeedSpec};

    #[test]
    fn single_column_in_one_step() {
        let d = DistributionSpec::new(DistKind::Gaussian, 32).unwrap();
        let op = MeasurementOperator::random(OperatorKind::IidDense, 32, 64, d, SeedSpec::new(1, 0)).unwrap();
        let y = op.column_vec(17);
        let r = omp(&op, &y, 5, 1e-10).unwrap();
        assert_eq!(r.iters, 1);
        assert!((r.x_hat[17] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_measurement() {
        let op = MeasurementOperator::identity(4);
        let r = omp(&op, &[0.0; 4], 2, 1e-8).unwrap();
        assert_eq!(r.iters, 0);
        assert_eq!(r.x_hat, vec![0.0; 4]);
    }

    #[test]
    fn recovers_sparse() {
        let d = DistributionSpec::new(DistKind::Gaussian, 32).unwrap();
        let op = MeasurementOperator::random(OperatorKind::IidDense, 32, 64, d, SeedSpec::new(2, 0)).unwrap();
        let x = draw_rademacher_spikes(64, 4, SeedSpec::new(2, 1)).unwrap();
        let y = op.apply(&x.to_dense()).unwrap();
        let r = omp(&op, &y, 32, 1e-10).unwrap();
        assert!(norm2(&sub(&r.x_hat, &x.to_dense())) < 1e-10);
    }

    #[test]
    fn errors() {
        let op = MeasurementOperator::identity(4);
        assert!(omp(&op, &[0.0; 3], 2, 1e-8).is_err());
        assert!(omp(&op, &[0.0; 4], 0, 1e-8).is_err());
        assert!(omp(&op, &[0.0; 4], 5, 1e-8).is_err());
        assert!(omp(&op, &[f64::NAN, 0.0, 0.0, 0.0], 1, 1e-8).is_err());
    }
}
