use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,
    #[error("inconsistent dimensions: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("order {i} out of range 0..={max}")]
    OrderOutOfRange { i: usize, max: usize },
    #[error("domains do not intersect")]
    DomainEmpty,
    #[error("pointwise minimum is not convex")]
    NotConvex,
    #[error("sphere measure is not balanced (|sum w n| = {0:e})")]
    UnbalancedInput(f64),
    #[error("normals are degenerate: {0}")]
    DegenerateNormals(String),
    #[error("solver did not converge: {0}")]
    NoConvergence(String),
    #[error("density is not symmetric under reflection")]
    Asymmetric,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown {kind}: {name}")]
    Unknown { kind: &'static str, name: String },
}

pub type Result<T> = std::result::Result<T, Error>;
