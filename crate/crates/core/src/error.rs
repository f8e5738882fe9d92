use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("size cap exceeded: {0}")]
    CapExceeded(String),

    #[error("point is not on the unit sphere (norm {0})")]
    NotOnSphere(String),

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("invalid companion data: {0}")]
    InvalidCompanion(String),

    #[error("target lies outside the convex hull of the candidates")]
    OutsideHull {
        /// Functional `h` with `h·p <= threshold` for every candidate and
        /// `h·target > threshold`.
        separator: crate::arith::QVector,
        threshold: crate::arith::Rational,
    },

    #[error("invalid complex operator: {0}")]
    Complex(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
