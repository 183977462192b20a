use thiserror::Error;

/// Errors raised by the kernels, objectives and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("rank {rank} is invalid for a {rows}x{cols} matrix")]
    InvalidRank { rank: usize, rows: usize, cols: usize },

    #[error("SVD failed to converge (condition estimate {condition_estimate:e})")]
    SvdFailed { condition_estimate: f64 },

    #[error("symmetric eigendecomposition failed to converge")]
    EigenFailed,

    #[error("matrix is not symmetric (relative asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("tangent space undefined: base has rank {rank} below search rank {search_rank}")]
    TangentUndefined { rank: usize, search_rank: usize },

    #[error("retraction undefined: core block is singular (sigma_min = {sigma_min:e})")]
    RetractionUndefined { sigma_min: f64 },

    #[error("invalid factors: {0}")]
    InvalidFactors(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid problem parameters: {0}")]
    InvalidProblem(String),

    #[error("ground truth has zero Frobenius norm")]
    ZeroGroundTruth,

    #[error("need {needed} trailing records with positive gap, found {found}")]
    InsufficientRecords { needed: usize, found: usize },

    #[error("landscape probe budget exceeded: {estimated} evaluations > limit {limit}")]
    BudgetExceeded { estimated: u64, limit: u64 },

    #[error("landscape probe is limited to n <= 4 and r <= 2 (got n = {n}, r = {r})")]
    ProbeTooLarge { n: usize, r: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
