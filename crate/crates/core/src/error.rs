use thiserror::Error;

use crate::control::ControlOutcome;
use crate::exprlang::{EvalError, ParseError};

#[derive(Debug, Error)]
pub enum Error {
    #[error("in `{context}`: {source}")]
    Parse {
        context: String,
        #[source]
        source: ParseError,
    },
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("metric is not positive definite at q = {q:?}")]
    NotPositiveDefinite { q: Vec<f64> },
    #[error("metric entry ({i},{j}) differs from ({j},{i}) at q = {q:?}")]
    AsymmetricMetric { i: usize, j: usize, q: Vec<f64> },
    #[error("constraint one-forms are linearly dependent at q = {q:?}")]
    RankDeficientConstraints { q: Vec<f64> },
    #[error("constraint and input distributions are not transversal at q = {q:?}")]
    NotTransversal { q: Vec<f64> },
    #[error("no admissible control: {0}")]
    ControlUnavailable(ControlOutcome),
    #[error("integration produced a non-finite state at t = {t}")]
    StepFailure { t: f64 },
    #[error("trajectories do not overlap in time")]
    GridMismatch,
    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("invalid settings: {0}")]
    InvalidSettings(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}
