use thiserror::Error;

/// Errors produced by field construction, quadrature, level-set and path routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("near-singular pivot: |c| = {0:e}")]
    NearSingularPivot(f64),
    #[error("wrong case: {0}")]
    WrongCase(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),
    #[error("invalid base point: {0}")]
    InvalidBasePoint(String),
    #[error("path construction failed: {0}")]
    ConstructionFailure(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
