use crate::linalg::DenseMatrix;

/// Lower-triangular all-ones matrix (cumulative sum).
pub fn build_l(n: usize) -> DenseMatrix {
    DenseMatrix::from_fn(n, n, |i, j| if j <= i { 1.0 } else { 0.0 })
}

/// First-order differencing matrix, the inverse of `build_l`: 1 on the
/// diagonal, -1 on the first subdiagonal.
pub fn build_d(n: usize) -> DenseMatrix {
    DenseMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else if i == j + 1 {
            -1.0
        } else {
            0.0
        }
    })
}

/// `L x`
pub fn cumulative_sum(x: &[f64]) -> Vec<f64> {
    x.iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect()
}

/// `D x`
pub fn difference(x: &[f64]) -> Vec<f64> {
    let mut prev = 0.0;
    x.iter()
        .map(|&v| {
            let d = v - prev;
            prev = v;
            d
        })
        .collect()
}

/// `D^T y`
pub fn difference_adjoint(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    (0..n)
        .map(|i| if i + 1 < n { y[i] - y[i + 1] } else { y[i] })
        .collect()
}
