use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::l0::SupportPattern;

/// How the iterate of a trace row was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepKind {
    /// The starting point.
    Start,
    /// `x - t * P grad` with `P` the support projection.
    Projected,
    /// `x - t * (I - P) grad`, leaving the current support subspace.
    Escape,
    /// `x - t * P J^T g` with `g` a scalarizer subgradient.
    Subgradient,
}

impl StepKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            StepKind::Start => "start",
            StepKind::Projected => "projected",
            StepKind::Escape => "escape",
            StepKind::Subgradient => "subgradient",
        }
    }
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Ok(match s {
            "start" => StepKind::Start,
            "projected" => StepKind::Projected,
            "escape" => StepKind::Escape,
            "subgradient" => StepKind::Subgradient,
            other => return Err(Error::InvalidConfig(format!("unknown step kind `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIter,
    EscapesExhausted,
    /// The run stopped on a numeric failure; only seen on traces attached to
    /// [`Error::Numeric`].
    Aborted,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::MaxIter => "max_iter",
            Termination::EscapesExhausted => "escapes_exhausted",
            Termination::Aborted => "aborted",
        }
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One iterate. `f` is the smooth part of the objective: `f` itself for
/// single-objective runs, the weighted sum for weight-sum runs and the
/// scalarized value `phi(F(x))` for Gerstewitz runs. `total = f + l0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    pub x: Vec<f64>,
    pub f: f64,
    pub l0: usize,
    pub total: f64,
    pub support: SupportPattern,
    pub step_kind: StepKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverTrace {
    pub rows: Vec<TraceRow>,
    pub termination: Termination,
    pub best_point: Vec<f64>,
    pub best_value: f64,
    /// Number of escape steps taken (multistart only).
    pub escapes: usize,
    /// Points where the projected gradient vanished, with their totals
    /// (multistart only).
    pub candidates: Vec<(Vec<f64>, f64)>,
    /// Running minimum of the total value after each row (Gerstewitz only).
    pub best_history: Vec<f64>,
    pub warnings: Vec<String>,
}

impl SolverTrace {
    pub(crate) fn new() -> Self {
        SolverTrace {
            rows: Vec::new(),
            termination: Termination::Aborted,
            best_point: Vec::new(),
            best_value: f64::INFINITY,
            escapes: 0,
            candidates: Vec::new(),
            best_history: Vec::new(),
            warnings: Vec::new(),
        }
    }

    /// Iterations performed (rows minus the starting point).
    pub fn iterations(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }

    pub fn last(&self) -> &TraceRow {
        self.rows.last().expect("trace has at least the starting row")
    }

    pub fn dim(&self) -> usize {
        self.rows.first().map_or(0, |r| r.x.len())
    }
}
