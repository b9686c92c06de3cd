//! Compressed sensing with symmetric Toeplitz-structured measurement
//! matrices: operators, restricted isometry analysis, and l1 recovery.

pub mod error;
pub mod linalg;
pub mod operators;
pub mod pipelines;
pub mod randgen;
pub mod recovery;
pub mod riplab;
pub mod signal;

pub use error::{Error, Result};
pub use operators::{GeneratorSource, LinearMap, MeasurementOperator, OperatorDescriptor, OperatorKind};
pub use randgen::{DistKind, DistributionSpec, SeedSpec};
pub use signal::SparseSignal;
