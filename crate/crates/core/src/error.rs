use thiserror::Error;

use crate::spectrum::SpectralReport;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("base graph is not regular: vertex {vertex} has degree {degree}, expected {expected}")]
    NonRegular {
        vertex: usize,
        degree: usize,
        expected: usize,
    },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("vertex {vertex} out of range for a graph on {order} vertices")]
    VertexOutOfRange { vertex: usize, order: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("invalid permutation for edge {0}-{1}")]
    InvalidPermutation(usize, usize),
    #[error("too large: {0}")]
    TooLarge(String),
    #[error("dense path refused: {size} exceeds the guard {guard}")]
    DenseGuard { size: usize, guard: usize },
    #[error("fibres {0} and {1} are not adjacent in the base graph")]
    FibresNotAdjacent(usize, usize),
    #[error("fibres are not pairwise adjacent in the base graph")]
    FibresNotPairwiseAdjacent,
    #[error("fibre {0} is used more than once")]
    FibresNotDistinct(usize),
    #[error("iterative eigensolver did not converge; best estimate {}", .0.lambda_star)]
    NotConverged(Box<SpectralReport>),
    #[error("squared norm {norm2} exceeds the allowed {limit}")]
    NormTooLarge { norm2: f64, limit: f64 },
    #[error("vectors have opposite signs at coordinate {0}")]
    NotSignCompatible(usize),
    #[error("vector is empty")]
    EmptyVector,
    #[error("not a Z-vector: {0}")]
    NotZVector(String),
    #[error("not a nonnegative dyadic vector: {0}")]
    NotDyadic(String),
    #[error("argument outside the domain: {0}")]
    DomainError(String),
    #[error("vertex ({0}, {1}) is not in the current sub-pattern")]
    VertexNotInU(usize, u32),
    #[error("empty input")]
    EmptyInput,
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),
    #[error("halves need n even and exactly n/2 distinct vertices in every fibre")]
    BadHalfSizes,
    #[error("subgraph has {size} vertices but at most {limit} are allowed")]
    SubgraphTooLarge { size: usize, limit: f64 },
    #[error("witness sets do not realise the pattern: {0}")]
    WitnessMismatch(String),
    #[error("invalid marginals: {0}")]
    InvalidMarginals(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
