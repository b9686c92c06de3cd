use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported operator kind for {op}: {kind}")]
    UnsupportedKind { op: &'static str, kind: String },

    #[error("enumeration budget exceeded: {subsets} subsets > budget {budget}; use rip_monte_carlo")]
    BudgetExceeded { subsets: u128, budget: u128 },

    #[error("{colors} colors cannot equitably color a graph of max degree {max_degree}")]
    TooFewColors { colors: usize, max_degree: usize },

    #[error("equitable rebalancing gave up after {moves} moves (class sizes {min}..{max})")]
    ColoringFailed { moves: usize, min: usize, max: usize },

    #[error("partition does not cover row {0}")]
    NonCovering(usize),

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("matrix is singular or not positive definite")]
    Singular,

    #[error("malformed input: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
