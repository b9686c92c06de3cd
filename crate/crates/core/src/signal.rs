use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An m-sparse vector in R^n stored as sorted support indices (0-based) and
/// the nonzero values on them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseSignal {
    n: usize,
    support: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSignal {
    pub fn new(n: usize, support: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if support.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: support.len(),
                got: values.len(),
            });
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "support must be sorted and distinct".into(),
            ));
        }
        if let Some(&last) = support.last() {
            if last >= n {
                return Err(Error::InvalidParameter(format!(
                    "support index {last} out of range for n = {n}"
                )));
            }
        }
        if values.iter().any(|v| *v == 0.0 || !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "stored values must be finite and nonzero".into(),
            ));
        }
        Ok(Self { n, support, values })
    }

    /// Keeps the exactly-nonzero entries of a dense vector.
    pub fn from_dense(x: &[f64]) -> Self {
        let (support, values) = x
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i, *v))
            .unzip();
        Self { n: x.len(), support, values }
    }

    pub fn zeros(n: usize) -> Self {
        Self { n, support: Vec::new(), values: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.support.iter().copied().zip(self.values.iter().copied())
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for (i, v) in self.iter() {
            x[i] = v;
        }
        x
    }

    pub fn norm2(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_supports() {
        assert!(SparseSignal::new(4, vec![2, 1], vec![1.0, 1.0]).is_err());
        assert!(SparseSignal::new(4, vec![1, 1], vec![1.0, 1.0]).is_err());
        assert!(SparseSignal::new(4, vec![4], vec![1.0]).is_err());
        assert!(SparseSignal::new(4, vec![0], vec![0.0]).is_err());
        assert!(SparseSignal::new(4, vec![0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn dense_round_trip() {
        let x = vec![0.0, -1.0, 0.0, 2.5];
        let s = SparseSignal::from_dense(&x);
        assert_eq!(s.support(), &[1, 3]);
        assert_eq!(s.to_dense(), x);
    }
}
