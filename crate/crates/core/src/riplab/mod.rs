//! Restricted isometry constants, the row dependency graph of a symmetric
//! Toeplitz submatrix with its equitable coloring, the block decomposition
//! that coloring induces, and the closed-form probability bounds.

mod coloring;
mod decomposition;
mod graph;
mod rip;
mod theory;

pub use coloring::{equitable_coloring, verify_partition, EquitablePartition, PartitionCertificate};
pub use decomposition::{block_rip_chain, verify_decomposition, BlockChainReport, DecompositionReport};
pub use graph::{dependency_graph, DependencyGraph, Graph};
pub use rip::{
    colex_rank, colex_unrank, gram_extremes, n_choose_k, rip_exact, rip_monte_carlo, RipMode, RipOptions,
    RipReport, SubsetExtremes,
};
pub use theory::{c0, f_value, q_for, theory_bounds, TheoryBounds, TheoryParams};

/// Largest relative deviation from an isometry given extreme Gram eigenvalues.
#[inline]
pub fn isometry_deviation(lambda_min: f64, lambda_max: f64) -> f64 {
    (lambda_max - 1.0).max(1.0 - lambda_min)
}
