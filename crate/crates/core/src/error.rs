use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("infeasible state space: {0}")]
    InfeasibleStateSpace(String),

    #[error("capacity exceeded: {what} needs {needed}, cap is {cap}")]
    Capacity {
        what: &'static str,
        needed: usize,
        cap: usize,
    },

    #[error("invalid move: {0}")]
    InvalidMove(String),

    #[error("missing boundary value for outside site {0}")]
    MissingBoundary(usize),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid rates: {0}")]
    InvalidRates(String),

    #[error("reducible chain: {0}")]
    Reducible(String),

    #[error("detailed balance violated: residual {residual:e} exceeds {tolerance:e}")]
    DetailedBalance { residual: f64, tolerance: f64 },

    #[error("model mismatch: expected {expected}, got {got}")]
    ModelMismatch {
        expected: &'static str,
        got: &'static str,
    },

    #[error("iterative eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("asymmetric quadratic form: defect {0:e}")]
    Asymmetric(f64),

    #[error("divergent quantity: {0}")]
    Divergence(String),

    #[error("bound violated: {0}")]
    BoundViolated(String),

    #[error("infeasible target: {0}")]
    Infeasible(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
