//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty-set-diameter: diameter of an empty point set is undefined")]
    EmptySetDiameter,

    #[error("not-a-cover: window point {point} is not contained in any cover set")]
    NotACover { point: usize },

    #[error("clique-method-needs-integers: metric has denominator {scale}")]
    CliqueMethodNeedsIntegers { scale: i64 },

    #[error("budget-exhausted: {what} exceeded its budget of {budget}")]
    BudgetExhausted { what: &'static str, budget: u64 },

    #[error("budget-exhausted: ball exceeds {budget} points; radius {achieved} fits")]
    BallBudget { budget: usize, achieved: u64 },

    /// A precondition of an operation is not met; carries the measured
    /// quantity next to what was required.
    #[error("precondition failed for {op}: {detail}")]
    Precondition { op: &'static str, detail: String },

    #[error("certificate failure in {op}: {detail}")]
    CertificateFailed { op: &'static str, detail: String },

    #[error("window-too-small: {detail}")]
    WindowTooSmall { detail: String },

    #[error("not a tree: {detail}")]
    NotATree { detail: String },

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("insufficient-range: {0}")]
    InsufficientRange(String),

    #[error("normal form audit failed: {0}")]
    NormalForm(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn pre(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Precondition {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn invalid(detail: impl Into<String>) -> Self {
        Error::InvalidInput(detail.into())
    }
}
