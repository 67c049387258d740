use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("torus spec mismatch: {0}")]
    SpecMismatch(String),
    #[error("axis {axis} out of range for n = {n}")]
    AxisOutOfRange { axis: usize, n: usize },
    #[error("invalid multi-index: {0}")]
    InvalidIndex(String),
    #[error("contraction requires an empty anti-holomorphic part, got I = {0:?}")]
    NonEmptyAntiholomorphic(Vec<usize>),
    #[error("wrong degree: {0}")]
    WrongDegree(String),
    #[error("input outside the domain of the operator (residual {residual:.3e})")]
    Domain { residual: f64 },
    #[error("numeric failure at iteration {iter}: {msg}")]
    NumericFailure { iter: usize, msg: String },
    #[error("order mismatch: {0} vs {1}")]
    OrderMismatch(usize, usize),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
