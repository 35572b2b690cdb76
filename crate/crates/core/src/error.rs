use thiserror::Error;

pub type Result<T, E = ChainError> = std::result::Result<T, E>;

/// Everything that can go wrong while building or analysing a chain.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChainError {
    #[error("weight {index} is {value}; every state needs strictly positive probability")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("need at least 2 states, got {0}")]
    TooFewStates(usize),

    #[error("probabilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("matrix is {rows}x{cols}; transition matrices must be square")]
    NotSquare { rows: usize, cols: usize },

    #[error("entry ({row}, {col}) is {value}; transition probabilities must be finite and non-negative")]
    BadEntry { row: usize, col: usize, value: f64 },

    #[error("row {row} sums to {sum}, expected 1")]
    RowSum { row: usize, sum: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("detailed balance fails at ({row}, {col}): |pi(x)P(x,y) - pi(y)P(y,x)| = {violation}")]
    NotReversible { row: usize, col: usize, violation: f64 },

    #[error("operator is not self-adjoint in the weighted inner product (violation {violation} at ({row}, {col}))")]
    NotSelfAdjoint { row: usize, col: usize, violation: f64 },

    #[error("chain is not irreducible")]
    NotIrreducible,

    #[error("pi is not stationary for this chain (max violation {violation} at state {state})")]
    NotStationary { state: usize, violation: f64 },

    #[error("linear system is numerically singular")]
    SingularSystem,

    #[error("chain is periodic (max non-trivial |eigenvalue| = {lambda}); the autocovariance series does not converge, use the spectral route")]
    PeriodicChain { lambda: f64 },

    #[error("autocovariance series needs {needed} terms, above the limit of {limit}")]
    TruncationLimit { needed: u64, limit: u64 },

    #[error("start state {state} is out of range for {n} states")]
    BadStartState { state: usize, n: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("gap spectrum has no eigenvalue below -{tol}; no witness can exist")]
    NoNegativeEigenvalue { tol: f64 },

    #[error("operator is not strictly positive (min eigenvalue {min_eigenvalue})")]
    NotStrictlyPositive { min_eigenvalue: f64 },

    #[error("component index {index} out of range for {count} components")]
    BadComponentIndex { index: usize, count: usize },

    #[error("block index {index} out of range for {count} blocks")]
    BadBlockIndex { index: usize, count: usize },

    #[error("block row {row} sums to {sum} (or has a negative/non-finite entry); replacement blocks must be row-stochastic")]
    NotRowStochastic { row: usize, sum: f64 },

    #[error("block {block} is not reversible for its conditional distribution: violation {violation} at ({row}, {col})")]
    NotReversibleForConditional {
        block: usize,
        row: usize,
        col: usize,
        violation: f64,
    },

    #[error("block structures differ: {0}")]
    StructureMismatch(String),

    #[error("mixture {which} is not irreducible")]
    NotIrreducibleMixture { which: &'static str },

    #[error("mixture weights must be positive and sum to 1: {0}")]
    BadWeights(String),

    #[error("mixing probability must lie in (0, 1), got {0}")]
    BadMixingProbability(f64),
}
