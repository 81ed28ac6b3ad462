use thiserror::Error;

use crate::solvers::SolverTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("matrix is not symmetric (entry ({row}, {col}) differs from its transpose)")]
    NonSymmetric { row: usize, col: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("quadratic is not convex: smallest eigenvalue {0:e}")]
    NotConvex(f64),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("step size {step} violates t < 1/L = {limit}")]
    StepTooLarge { step: f64, limit: f64 },

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("scalarizer not finite-valued: <a_{index}, k0> = {value} must be positive")]
    ScalarizerNotFinite { index: usize, value: f64 },

    #[error("invalid halfspace {index}: zero normal")]
    ZeroNormal { index: usize },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("problem size n = {n} exceeds the cap of {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("unknown problem `{name}`; available: {}", available.join(", "))]
    UnknownProblem {
        name: String,
        available: Vec<&'static str>,
    },

    /// A solver produced a non-finite or diverging iterate. The trace recorded
    /// up to that point is attached.
    #[error("numeric failure at iteration {iteration}: {message}")]
    Numeric {
        iteration: usize,
        message: String,
        trace: Box<SolverTrace>,
    },
}

impl Error {
    pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, got })
        }
    }
}
