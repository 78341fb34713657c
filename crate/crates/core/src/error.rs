use thiserror::Error;

/// Errors surfaced by model construction, series evaluation and solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid weight at index {index:?}: {value} (weights must be finite and >= 0)")]
    InvalidWeight { index: Vec<i64>, value: f64 },

    #[error("index {index:?} is outside the declared membership rule")]
    IndexOutsideSet { index: Vec<i64> },

    #[error("weight vector must have {expected} strictly positive components, got {got:?}")]
    InvalidWeightVector { expected: usize, got: Vec<f64> },

    #[error("exponent vector must be strictly positive and sum to 1 (got sum {sum})")]
    InvalidExponentVector { sum: f64 },

    #[error("series did not converge within {max_level} truncation levels (tail bound {tail_bound:e})")]
    NonConvergent { max_level: u64, tail_bound: f64 },

    #[error("quadrature did not converge to the requested tolerance (error estimate {err_est:e})")]
    QuadratureNonConvergent { err_est: f64 },

    #[error("denominator degenerate at truncation level {level}; increase the truncation")]
    InsufficientTruncation { level: u64 },

    #[error("budget N = {budget} is outside the admissible range ({lo}, {hi:?}]")]
    BudgetOutOfRange {
        budget: f64,
        lo: f64,
        hi: Option<f64>,
    },

    #[error("model does not declare pairwise orthogonal A-images; sup reduction unavailable")]
    NotOrthogonal,

    #[error("optimizer stagnated; best value {best} at h = {h:?}")]
    OptimizerStagnation { best: f64, h: Vec<f64> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("model spec error: {0}")]
    ModelSpec(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
