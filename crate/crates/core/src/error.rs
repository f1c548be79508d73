use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("row {row} sums to {sum}; matrix rows must sum to 1")]
    NonStochasticRow { row: usize, sum: f64 },
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("state `{0}` has no label set")]
    MissingLabel(String),
    #[error("negative entry {value} in row {row}, column {col}")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("initial distribution {0}")]
    InvalidDistribution(String),
    #[error("traces in a trace set must all have the same nonzero length")]
    LengthMismatch,
    #[error("a path must contain at least one state")]
    EmptyPath,
    #[error("transition {from} -> {to} has probability zero")]
    ZeroProbabilityStep { from: String, to: String },
    #[error("block index {0} out of range")]
    BlockOutOfRange(usize),
    #[error("index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("interval row contains no stochastic vector")]
    EmptyInterval,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("`{0}` is not a member of the block it should represent")]
    InvalidRepresentative(String),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("syntax error at column {position}: expected {expected}")]
    SyntaxError { position: usize, expected: String },
    #[error("probability threshold {0} is outside [0, 1]")]
    ThresholdOutOfRange(f64),
    #[error("probability queries cannot be nested inside a larger formula")]
    NestedQuery,
    #[error("parse error: {0}")]
    Parse(String),
}
