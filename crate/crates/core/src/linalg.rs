//! Small dense linear algebra: row-major matrices, cyclic Jacobi for the
//! spectra of symmetric Gram matrices, Cholesky and conjugate gradients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, got: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn matvec_transpose(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            if yi != 0.0 {
                axpy(yi, self.row(i), &mut out);
            }
        }
        out
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (l, &a) in self.row(i).iter().enumerate() {
                if a != 0.0 {
                    axpy(a, other.row(l), orow);
                }
            }
        }
        out
    }

    /// `A^T A`.
    pub fn gram(&self) -> DenseMatrix {
        let mut g = DenseMatrix::zeros(self.cols, self.cols);
        for i in 0..self.rows {
            let r = self.row(i);
            for a in 0..self.cols {
                let ra = r[a];
                if ra == 0.0 {
                    continue;
                }
                for b in a..self.cols {
                    g.data[a * self.cols + b] += ra * r[b];
                }
            }
        }
        for a in 0..self.cols {
            for b in 0..a {
                g.data[a * self.cols + b] = g.data[b * self.cols + a];
            }
        }
        g
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|v| v.abs()).sum()
}

#[inline]
pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted
/// ascending. Sweeps stop once the off-diagonal Frobenius norm falls below
/// `1e-12` times the matrix norm, or after 100 sweeps.
pub fn symmetric_eigenvalues(m: &DenseMatrix) -> Vec<f64> {
    assert_eq!(m.rows, m.cols, "eigenvalues need a square matrix");
    let n = m.rows;
    let mut a = m.data.clone();
    let scale = norm2(&a).max(f64::MIN_POSITIVE);
    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    s += a[p * n + q] * a[p * n + q];
                }
            }
        }
        s.sqrt()
    };
    for _sweep in 0..100 {
        if off(&a) <= 1e-12 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..n {
                    let arp = a[r * n + p];
                    let arq = a[r * n + q];
                    a[r * n + p] = c * arp - s * arq;
                    a[r * n + q] = s * arp + c * arq;
                }
                for r in 0..n {
                    let apr = a[p * n + r];
                    let aqr = a[q * n + r];
                    a[p * n + r] = c * apr - s * aqr;
                    a[q * n + r] = s * apr + c * aqr;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// Lower-triangular Cholesky factor of an SPD matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    pub fn factor(m: &DenseMatrix) -> Result<Self> {
        assert_eq!(m.rows, m.cols);
        let n = m.rows;
        let mut l = vec![0.0; n * n];
        let tiny = 1e-14 * (0..n).map(|i| m[(i, i)].abs()).fold(0.0, f64::max);
        for j in 0..n {
            let mut d = m[(j, j)] - dot(&l[j * n..j * n + j], &l[j * n..j * n + j]);
            if !(d > tiny) {
                return Err(Error::Singular);
            }
            d = d.sqrt();
            l[j * n + j] = d;
            for i in j + 1..n {
                let s = m[(i, j)] - dot(&l[i * n..i * n + j], &l[j * n..j * n + j]);
                l[i * n + j] = s / d;
            }
        }
        Ok(Self { n, l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut z = b.to_vec();
        for i in 0..n {
            let s = dot(&self.l[i * n..i * n + i], &z[..i]);
            z[i] = (z[i] - s) / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for r in i + 1..n {
                s -= self.l[r * n + i] * z[r];
            }
            z[i] = s / self.l[i * n + i];
        }
        z
    }
}

/// Conjugate gradients for an SPD operator. Returns the iterate and the
/// final relative residual.
pub fn conjugate_gradient(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    rel_tol: f64,
    max_iters: usize,
) -> (Vec<f64>, f64) {
    let mut x = vec![0.0; b.len()];
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return (x, 0.0);
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    for _ in 0..max_iters {
        if rr.sqrt() <= rel_tol * bnorm {
            break;
        }
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            break;
        }
        let alpha = rr / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
    }
    (x, rr.sqrt() / bnorm)
}

/// CGLS for `min |A x - b|_2` given `A` and `A^T` as closures. Stops when
/// `|r| <= rel_tol |b|` or the normal-equation residual vanishes. Returns
/// the iterate and the recursively updated relative residual.
pub fn cgls(
    forward: impl Fn(&[f64]) -> Vec<f64>,
    adjoint: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    rel_tol: f64,
    max_iters: usize,
) -> (Vec<f64>, f64) {
    let bnorm = norm2(b);
    let mut r = b.to_vec();
    let mut s = adjoint(&r);
    let mut x = vec![0.0; s.len()];
    if bnorm == 0.0 {
        return (x, 0.0);
    }
    let s0 = norm2(&s);
    let mut p = s.clone();
    let mut gamma = dot(&s, &s);
    for _ in 0..max_iters {
        if norm2(&r) <= rel_tol * bnorm || gamma.sqrt() <= 1e-15 * s0 {
            break;
        }
        let q = forward(&p);
        let qq = dot(&q, &q);
        if !(qq > 0.0) {
            break;
        }
        let alpha = gamma / qq;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &q, &mut r);
        s = adjoint(&r);
        let next = dot(&s, &s);
        let beta = next / gamma;
        gamma = next;
        for (pi, si) in p.iter_mut().zip(&s) {
            *pi = si + beta * *pi;
        }
    }
    (x, norm2(&r) / bnorm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cgls_solves_square_and_least_squares() {
        let a = DenseMatrix::from_row_major(3, 3, vec![4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 2.0, 5.0]).unwrap();
        let x = vec![1.0, -1.0, 2.0];
        let b = a.matvec(&x);
        let (z, rel) = cgls(|v| a.matvec(v), |v| a.matvec_transpose(v), &b, 1e-14, 100);
        assert!(rel <= 1e-13);
        assert!(z.iter().zip(&x).all(|(p, q)| (p - q).abs() < 1e-12));
        let tall = DenseMatrix::from_row_major(3, 1, vec![1.0, 1.0, 1.0]).unwrap();
        let (z, _) = cgls(|v| tall.matvec(v), |v| tall.matvec_transpose(v), &[1.0, 2.0, 6.0], 1e-14, 10);
        assert!((z[0] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn jacobi_diagonal_and_2x2() {
        let m = DenseMatrix::from_row_major(2, 2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let ev = symmetric_eigenvalues(&m);
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
        let d = DenseMatrix::from_row_major(3, 3, vec![5.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 2.0]).unwrap();
        assert_eq!(symmetric_eigenvalues(&d), vec![-1.0, 2.0, 5.0]);
    }

    #[test]
    fn jacobi_trace_and_frobenius_invariants() {
        let n = 7;
        let b = DenseMatrix::from_fn(n, n, |i, j| ((i * 31 + j * 17) % 11) as f64 - 5.0);
        let m = b.gram();
        let ev = symmetric_eigenvalues(&m);
        let tr: f64 = (0..n).map(|i| m[(i, i)]).sum();
        assert!((ev.iter().sum::<f64>() - tr).abs() < 1e-9 * tr.abs());
        let fro2 = m.frobenius_norm().powi(2);
        assert!((ev.iter().map(|e| e * e).sum::<f64>() - fro2).abs() < 1e-9 * fro2);
        assert!(ev[0] > -1e-9);
    }

    #[test]
    fn cholesky_solves() {
        let a = DenseMatrix::from_row_major(3, 3, vec![4.0, 2.0, 0.0, 2.0, 5.0, 1.0, 0.0, 1.0, 3.0]).unwrap();
        let ch = Cholesky::factor(&a).unwrap();
        let x = ch.solve(&[1.0, 2.0, 3.0]);
        let r = sub(&a.matvec(&x), &[1.0, 2.0, 3.0]);
        assert!(norm2(&r) < 1e-14);
        let sing = DenseMatrix::from_row_major(2, 2, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(Cholesky::factor(&sing).is_err());
    }

    #[test]
    fn cg_matches_cholesky() {
        let b = DenseMatrix::from_fn(9, 5, |i, j| ((i * 7 + j * 3) % 5) as f64 + if i == j { 4.0 } else { 0.0 });
        let g = b.gram();
        let rhs = vec![1.0, -1.0, 0.5, 2.0, 0.0];
        let (x, rel) = conjugate_gradient(|p| g.matvec(p), &rhs, 1e-14, 100);
        let y = Cholesky::factor(&g).unwrap().solve(&rhs);
        assert!(rel < 1e-12);
        assert!(norm2(&sub(&x, &y)) < 1e-10);
    }
}
