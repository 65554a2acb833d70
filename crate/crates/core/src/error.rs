use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid or arity mismatch: {0}")]
    Mismatch(String),

    #[error("time {t} outside [0, {horizon}]")]
    TimeOutOfRange { t: f64, horizon: f64 },

    /// Picard iteration failed to reach the tolerance.
    #[error("fixed-point iteration did not contract after {iterations} iterations (last ratio {last_ratio:.3})")]
    NonContraction {
        iterations: usize,
        last_ratio: f64,
        ratios: Vec<f64>,
    },

    #[error("gradient bound violated: sup |grad u| = {observed:.4} > {bound}")]
    GradientBound { observed: f64, bound: f64 },

    #[error("no lambda in the ladder up to {max} satisfied the contraction and gradient conditions")]
    LambdaExhausted { max: f64, diagnostics: Vec<String> },

    #[error("inverse map did not converge at t = {t} (residual {residual:e} after {iterations} iterations)")]
    InverseDiverged { t: f64, residual: f64, iterations: usize },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub fn mismatch(msg: impl Into<String>) -> Self {
        Error::Mismatch(msg.into())
    }
}
