use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by validation, alignment and the guarantee computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("output grid needs at least two levels, got {0}")]
    GridTooSmall(usize),
    #[error("output grid must start at zero and strictly increase with finite levels")]
    GridNotCanonical,
    #[error("distribution weights must be nonnegative and finite")]
    NegativeWeight,
    #[error("distribution weights sum to {sum} instead of 1")]
    WeightsNotNormalized { sum: f64 },
    #[error("length mismatch: expected {expected} per-level entries, got {got}")]
    Alignment { expected: usize, got: usize },
    #[error("action cost must be finite and nonnegative")]
    NegativeCost,
    #[error("mean {mean} is not achievable on a grid with maximum {max}")]
    MeanOutOfRange { mean: f64, max: f64 },
    #[error("technology must contain at least one action")]
    EmptyTechnology,
    #[error("invalid contract: {0}")]
    InvalidContract(&'static str),
    #[error("discount factor must be positive and finite")]
    InvalidBeta,
    #[error("no known action is profitable (needs some expected output exceeding cost)")]
    NoProfitableAction,
    #[error("observed action is incompatible: {0}")]
    IncompatibleObservation(&'static str),
    #[error("first-period share {share} outside the admissible interval [{lo}, {hi}]")]
    ShareOutOfRange { share: f64, lo: f64, hi: f64 },
    #[error("{0}")]
    InvalidArgument(&'static str),
    #[error("internal invariant violated: {0}")]
    Internal(&'static str),
}
