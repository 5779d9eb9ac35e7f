use thiserror::Error;

/// Errors raised across the estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("density is singular at x = 0 for shape {beta} < 1")]
    SingularDensity { beta: f64 },

    /// The prior mean can only be pinned to the anticipated reliable life when `w > 1/β`.
    #[error("elicitation constraint w > 1/β violated at β = {beta}: w(β) = {w}, 1/β = {inv_beta}")]
    ElicitationConstraint { beta: f64, w: f64, inv_beta: f64 },

    #[error("no finite maximum likelihood estimate: {0}")]
    NoFiniteMle(String),

    #[error("numerical procedure did not converge: {0}")]
    NonConvergence(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unbiasing factor is for (n, r) = ({expected_n}, {expected_r}), sample has ({n}, {r})")]
    DesignMismatch {
        expected_n: usize,
        expected_r: usize,
        n: usize,
        r: usize,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
