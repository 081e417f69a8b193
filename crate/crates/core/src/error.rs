use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("insufficient observations: need at least {needed} rows, got {got}")]
    InsufficientObservations { needed: usize, got: usize },

    #[error("dimension mismatch: {context} (expected {expected}, got {got})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("matrix must be column-centered before this operation")]
    NotCentered,

    #[error("rank zero: matrix has no singular value above tolerance")]
    RankZero,

    #[error("ridge penalty must be finite and strictly positive, got {0}")]
    InvalidLambda(f64),

    #[error("degenerate similarity: zero Gram matrix has no defined correlation")]
    DegenerateSimilarity,

    #[error("invalid permutation: not a bijection on 0..{0}")]
    InvalidPermutation(usize),

    #[error("metric pair list must be non-empty")]
    EmptyMetricList,

    #[error("band unresolved at this T: no DFT frequency falls inside {0}")]
    BandUnresolved(String),

    #[error("zero-power channel {0}: coherence undefined")]
    ZeroPowerChannel(usize),

    #[error("matrix is not symmetric within tolerance")]
    NotSymmetric,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
