use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("matrix is not positive definite: pivot {pivot} = {value:e} <= {threshold:e}")]
    NotPositiveDefinite {
        pivot: usize,
        value: f64,
        threshold: f64,
    },

    #[error("antenna ratio out of range: need n_r > n_t, got n_r = {n_r}, n_t = {n_t}")]
    BetaOutOfRange { n_t: f64, n_r: f64 },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("infeasible search interval [{lo}, {hi}]")]
    InfeasibleInterval { lo: f64, hi: f64 },

    #[error("could not bracket the optimum in beta below {limit}")]
    BracketingFailure { limit: f64 },

    #[error("lattice contains no feasible point")]
    EmptyFeasibleSet,
}
