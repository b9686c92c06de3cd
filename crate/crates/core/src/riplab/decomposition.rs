use serde::{Deserialize, Serialize};

use super::coloring::EquitablePartition;
use super::isometry_deviation;
use crate::error::{Error, Result};
use crate::linalg::{dot, symmetric_eigenvalues, DenseMatrix};
use crate::operators::LinearMap;

/// Residuals of the row-block identity
/// `|A_T x|^2 = sum_j |A_T^j x|^2 = sum_j (|C_j|/k) |sqrt(k/|C_j|) A_T^j x|^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub probes: usize,
    pub max_rel_residual_blocks: f64,
    pub max_rel_residual_rescaled: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn submatrix(op: &dyn LinearMap, subset: &[usize]) -> Result<DenseMatrix> {
    if subset.is_empty() || subset.iter().any(|&t| t >= op.ncols()) {
        return Err(Error::InvalidParameter("column subset must be nonempty and in range".into()));
    }
    let cols: Vec<Vec<f64>> = subset.iter().map(|&j| op.column(j)).collect();
    Ok(DenseMatrix::from_fn(op.nrows(), subset.len(), |i, j| cols[j][i]))
}

fn check_cover(k: usize, p: &EquitablePartition) -> Result<()> {
    let mut seen = vec![false; k];
    for class in &p.classes {
        for &r in class {
            if r >= k {
                return Err(Error::InvalidParameter(format!("row {r} out of range for k = {k}")));
            }
            seen[r] = true;
        }
    }
    match seen.iter().position(|s| !s) {
        Some(r) => Err(Error::NonCovering(r)),
        None => Ok(()),
    }
}

/// Checks both equalities of the block identity for every probe `x`
/// (length `|T|`) at relative tolerance `1e-10`. Rows listed twice are not
/// rejected here; they show up as a residual.
pub fn verify_decomposition(
    op: &dyn LinearMap,
    subset: &[usize],
    partition: &EquitablePartition,
    probes: &[Vec<f64>],
) -> Result<DecompositionReport> {
    const TOL: f64 = 1e-10;
    let k = op.nrows();
    check_cover(k, partition)?;
    let at = submatrix(op, subset)?;
    let mut max_blocks: f64 = 0.0;
    let mut max_rescaled: f64 = 0.0;
    for x in probes {
        crate::error::check_len(subset.len(), x.len())?;
        let ax = at.matvec(x);
        let total = dot(&ax, &ax);
        let mut blocks = 0.0;
        let mut rescaled = 0.0;
        for class in &partition.classes {
            if class.is_empty() {
                continue;
            }
            let part: f64 = class.iter().map(|&r| ax[r] * ax[r]).sum();
            blocks += part;
            let w = class.len() as f64 / k as f64;
            let scale = (k as f64 / class.len() as f64).sqrt();
            let tilde: f64 = class.iter().map(|&r| (scale * ax[r]).powi(2)).sum();
            rescaled += w * tilde;
        }
        let denom = total.max(f64::MIN_POSITIVE);
        max_blocks = max_blocks.max((total - blocks).abs() / denom);
        max_rescaled = max_rescaled.max((total - rescaled).abs() / denom);
    }
    Ok(DecompositionReport {
        probes: probes.len(),
        max_rel_residual_blocks: max_blocks,
        max_rel_residual_rescaled: max_rescaled,
        tolerance: TOL,
        passed: max_blocks <= TOL && max_rescaled <= TOL,
    })
}

/// Isometry deviation of each rescaled block `sqrt(k/|C_j|) A_T^j` next to
/// that of `A_T`. Since `A_T^T A_T` is the `|C_j|/k`-weighted average of the
/// block Gram matrices, `delta(A_T) <= max_j delta_j` must always hold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockChainReport {
    pub block_deltas: Vec<f64>,
    pub full_delta: f64,
    pub implication_holds: bool,
}

pub fn block_rip_chain(
    op: &dyn LinearMap,
    subset: &[usize],
    partition: &EquitablePartition,
) -> Result<BlockChainReport> {
    let k = op.nrows();
    check_cover(k, partition)?;
    let at = submatrix(op, subset)?;
    let deviation = |m: &DenseMatrix| {
        let ev = symmetric_eigenvalues(&m.gram());
        isometry_deviation(ev[0], ev[ev.len() - 1])
    };
    let full_delta = deviation(&at);
    let block_deltas: Vec<f64> = partition
        .classes
        .iter()
        .filter(|c| !c.is_empty())
        .map(|class| {
            let scale = (k as f64 / class.len() as f64).sqrt();
            let block = DenseMatrix::from_fn(class.len(), subset.len(), |i, j| scale * at[(class[i], j)]);
            deviation(&block)
        })
        .collect();
    let worst = block_deltas.iter().copied().fold(0.0, f64::max);
    Ok(BlockChainReport {
        implication_holds: full_delta <= worst + 1e-12 * (1.0 + worst),
        block_deltas,
        full_delta,
    })
}
