use alloc::string::String;

use crate::solver::lp::LpError;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("fewer than two classes")]
    TooFewClasses,
    #[error("label index {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("class count mismatch: expected {expected}, found {found}")]
    ClassCountMismatch { expected: usize, found: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("class label {0:?} was not seen during training")]
    UnseenClass(String),
    #[error("exact backend supports at most {max} classes, got {k}")]
    TooManyClasses { k: usize, max: usize },
    #[error("exact backend requires the 0-1 loss")]
    ExactRequiresZeroOne,
    #[error("non-finite objective at iteration {iteration}")]
    NonFiniteObjective { iteration: usize },
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("lower bound unavailable for CMRC")]
    LowerBoundUnavailable,
    #[error("linear program: {0}")]
    Lp(#[from] LpError),
}
