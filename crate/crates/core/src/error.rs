use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("argument {value} outside the domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("invalid harmonic index: ell={ell}, m={m}, s={s}")]
    Index { ell: i64, m: i64, s: i64 },

    #[error("point lies within the pole exclusion radius of a chart")]
    ChartDomain,

    #[error("quadrature band limit {rule} is below the requested band limit {requested}")]
    BandLimit { rule: usize, requested: usize },

    #[error("spin mismatch: {0} vs {1}")]
    SpinMismatch(i32, i32),

    #[error("covariance coefficient at degree {ell} is negative ({value:e})")]
    NegativeCoefficient { ell: usize, value: f64 },

    #[error("real-constrained draws need spin 0 and real coefficients")]
    Reality,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("quadrature needs {nodes} nodes, cap is {cap}")]
    Resource { nodes: usize, cap: usize },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
