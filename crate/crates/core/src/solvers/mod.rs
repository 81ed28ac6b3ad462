//! Subgradient-type solvers for `min f(x) + ||x||_0` and its multiobjective
//! scalarizations.
//!
//! Every solver works with the support projection `P_k` of the current
//! iterate. `P_k grad f(x_k)` equals `grad f(x_k) + v` for the l0 subgradient
//! `v` that cancels the gradient off the support, so a projected step never
//! leaves the coordinate subspace of `x_k` and supports can only shrink.
//!
//! * [`solve_l0_descent`]: `x_{k+1} = x_k - t P_k grad f(x_k)` until the
//!   projected gradient is small.
//! * [`solve_l0_multistart`]: same, but at a projected stationary point steps
//!   along `(I - P_k) grad f(x_k)` to leave the subspace and look for another
//!   local minimizer.
//! * [`solve_weight_sum`]: projected descent on `sum_i w_i f_i`.
//! * [`solve_gerstewitz`]: projected subgradient descent on `phi(F(x))`, where
//!   `phi` is a polyhedral Gerstewitz function, tracking the best point seen.

mod trace;

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::l0::{l0_norm, support_pattern, SupportPattern, ZeroMode};
use crate::objective::{QuadraticObjective, SmoothObjective};
use crate::scalarize::{PolyhedralScalarizer, WeightVector};
use crate::vecops::{all_finite, axpy_step, norm2};

pub use trace::{SolverTrace, StepKind, Termination, TraceRow};

/// Abort when `|total|` grows beyond this factor of `max(|initial total|, 1)`.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Constant step size `t`.
    pub step: f64,
    /// Stopping tolerance.
    pub eps_stop: f64,
    pub max_iter: usize,
    pub zero_mode: ZeroMode,
    /// Set components that `zero_mode` treats as zero to exact `0.0` after
    /// every step (and at the start).
    pub snap: bool,
    /// Maximum number of escape steps for [`solve_l0_multistart`];
    /// `None` means `2n`.
    pub escape_limit: Option<usize>,
}

impl SolverConfig {
    pub fn new(step: f64) -> Self {
        SolverConfig {
            step,
            eps_stop: 1e-6,
            max_iter: 10_000,
            zero_mode: ZeroMode::Exact,
            snap: false,
            escape_limit: None,
        }
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps_stop = eps;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    /// Tolerance mode with snapping, as in the "|x_i| <= eps counts as zero"
    /// variant of the l0 function.
    pub fn with_tolerance(mut self, eps_zero: f64) -> Self {
        self.zero_mode = ZeroMode::Tol(eps_zero);
        self.snap = true;
        self
    }

    pub fn with_escape_limit(mut self, limit: usize) -> Self {
        self.escape_limit = Some(limit);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "step must be positive, got {}",
                self.step
            )));
        }
        if !(self.eps_stop > 0.0 && self.eps_stop.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "eps_stop must be positive, got {}",
                self.eps_stop
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        self.zero_mode.validate()
    }

    fn check_step(&self, lipschitz: f64) -> Result<()> {
        if lipschitz > 0.0 && self.step * lipschitz >= 1.0 {
            return Err(Error::StepTooLarge {
                step: self.step,
                limit: 1.0 / lipschitz,
            });
        }
        Ok(())
    }
}

/// `F = (f_1, ..., f_m)` over a common `R^n`.
pub struct VectorObjective {
    components: Vec<Box<dyn SmoothObjective>>,
}

impl std::fmt::Debug for VectorObjective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VectorObjective")
            .field("m", &self.len())
            .field("n", &self.dim())
            .finish()
    }
}

impl VectorObjective {
    pub fn new(components: Vec<Box<dyn SmoothObjective>>) -> Result<Self> {
        let first = components.first().ok_or(Error::Empty("objective list"))?;
        let n = first.dim();
        for c in &components {
            Error::check_dim(n, c.dim())?;
        }
        Ok(VectorObjective { components })
    }

    pub fn from_quadratics(parts: Vec<QuadraticObjective>) -> Result<Self> {
        Self::new(
            parts
                .into_iter()
                .map(|q| Box::new(q) as Box<dyn SmoothObjective>)
                .collect(),
        )
    }

    /// Number of objectives `m`.
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Dimension `n` of the decision variable.
    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    pub fn components(&self) -> &[Box<dyn SmoothObjective>] {
        &self.components
    }

    /// `max_i L_i`.
    pub fn lipschitz_max(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.lipschitz_grad())
            .fold(0.0, f64::max)
    }

    pub fn values(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.value(x)).collect()
    }

    /// `J(x)^T g = sum_i g_i grad f_i(x)`.
    pub fn jacobian_transpose_apply(&self, x: &[f64], g: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (c, &gi) in self.components.iter().zip(g) {
            for (o, d) in out.iter_mut().zip(c.gradient(x)) {
                *o += gi * d;
            }
        }
        out
    }

    /// Upper bound on the Frobenius norm of the Jacobian over the box
    /// `[lower, upper]`: `||grad f_i(x)|| <= ||grad f_i(center)|| + L_i * r`
    /// with `r` the half-diagonal.
    pub fn jacobian_bound(&self, lower: &[f64], upper: &[f64]) -> Result<f64> {
        Error::check_dim(self.dim(), lower.len())?;
        Error::check_dim(self.dim(), upper.len())?;
        let center: Vec<f64> = lower.iter().zip(upper).map(|(a, b)| 0.5 * (a + b)).collect();
        let radius = 0.5
            * lower
                .iter()
                .zip(upper)
                .map(|(a, b)| (b - a) * (b - a))
                .sum::<f64>()
                .sqrt();
        let sq: f64 = self
            .components
            .iter()
            .map(|c| {
                let bound = norm2(&c.gradient(&center)) + c.lipschitz_grad() * radius;
                bound * bound
            })
            .sum();
        Ok(sq.sqrt())
    }
}

/// `x -> sum_i w_i f_i(x)`, reporting `max_i L_i` as its Lipschitz constant.
struct WeightedSum<'a> {
    parts: &'a VectorObjective,
    weights: &'a [f64],
}

impl SmoothObjective for WeightedSum<'_> {
    fn dim(&self) -> usize {
        self.parts.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.parts
            .components
            .iter()
            .zip(self.weights)
            .map(|(c, w)| w * c.value(x))
            .sum()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.parts.jacobian_transpose_apply(x, self.weights)
    }

    fn lipschitz_grad(&self) -> f64 {
        self.parts.lipschitz_max()
    }
}

fn check_start(n: usize, x0: &[f64]) -> Result<Vec<f64>> {
    Error::check_dim(n, x0.len())?;
    if !all_finite(x0) {
        return Err(Error::NonFinite("starting point"));
    }
    Ok(x0.to_vec())
}

/// Mutable state shared by the drivers: the trace under construction and the
/// divergence reference.
struct Recorder {
    trace: SolverTrace,
    mode: ZeroMode,
    initial_total: Option<f64>,
}

impl Recorder {
    fn new(mode: ZeroMode) -> Self {
        Recorder {
            trace: SolverTrace::new(),
            mode,
            initial_total: None,
        }
    }

    fn push(&mut self, x: &[f64], f: f64, step_kind: StepKind) -> Result<&TraceRow> {
        let k = self.trace.rows.len();
        let l0 = l0_norm(x, self.mode);
        let total = f + l0 as f64;
        if !total.is_finite() {
            return Err(self.fail(k, format!("objective value is {f}")));
        }
        let reference = *self.initial_total.get_or_insert(total);
        if total.abs() > DIVERGENCE_FACTOR * reference.abs().max(1.0) {
            return Err(self.fail(
                k,
                format!("diverging: total {total:e} vs initial {reference:e}"),
            ));
        }
        self.trace.rows.push(TraceRow {
            k,
            x: x.to_vec(),
            f,
            l0,
            total,
            support: support_pattern(x, self.mode),
            step_kind,
        });
        Ok(self.trace.rows.last().unwrap())
    }

    fn fail(&mut self, iteration: usize, message: String) -> Error {
        let mut trace = std::mem::replace(&mut self.trace, SolverTrace::new());
        trace.termination = Termination::Aborted;
        if let Some(last) = trace.rows.last() {
            trace.best_point = last.x.clone();
            trace.best_value = last.total;
        }
        Error::Numeric {
            iteration,
            message,
            trace: Box::new(trace),
        }
    }

    fn finish_at_last(mut self, termination: Termination) -> SolverTrace {
        self.trace.termination = termination;
        let last = self.trace.last().clone();
        self.trace.best_point = last.x;
        self.trace.best_value = last.total;
        self.trace
    }
}

fn take_step(
    rec: &mut Recorder,
    x: &[f64],
    t: f64,
    direction: &[f64],
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    if !all_finite(direction) {
        let k = rec.trace.rows.len();
        return Err(rec.fail(k, "non-finite search direction".into()));
    }
    let mut next = axpy_step(x, t, direction);
    if !all_finite(&next) {
        let k = rec.trace.rows.len();
        return Err(rec.fail(k, "non-finite iterate".into()));
    }
    if cfg.snap {
        cfg.zero_mode.snap(&mut next);
    }
    Ok(next)
}

fn prepare(f: &dyn SmoothObjective, x0: &[f64], cfg: &SolverConfig, lipschitz: f64) -> Result<Vec<f64>> {
    cfg.validate()?;
    cfg.check_step(lipschitz)?;
    let mut x = check_start(f.dim(), x0)?;
    if cfg.snap {
        cfg.zero_mode.snap(&mut x);
    }
    Ok(x)
}

fn projected_descent(f: &dyn SmoothObjective, x0: &[f64], cfg: &SolverConfig) -> Result<SolverTrace> {
    let mut x = prepare(f, x0, cfg, f.lipschitz_grad())?;
    let mut rec = Recorder::new(cfg.zero_mode);
    let mut kind = StepKind::Start;
    for k in 0..=cfg.max_iter {
        let support = rec.push(&x, f.value(&x), kind)?.support.clone();
        let pg = support.project_unchecked(&f.gradient(&x));
        if norm2(&pg) < cfg.eps_stop {
            return Ok(rec.finish_at_last(Termination::Converged));
        }
        if k == cfg.max_iter {
            break;
        }
        x = take_step(&mut rec, &x, cfg.step, &pg, cfg)?;
        kind = StepKind::Projected;
    }
    Ok(rec.finish_at_last(Termination::MaxIter))
}

/// Projected-support descent for `f + ||.||_0`.
///
/// Requires `t < 1/L`. Stops with [`Termination::Converged`] once
/// `||P_k grad f(x_k)|| < eps_stop`; the terminal point then minimizes `f`
/// over its support subspace up to that tolerance, which makes it a local
/// minimizer of `f + ||.||_0`.
pub fn solve_l0_descent(f: &dyn SmoothObjective, x0: &[f64], cfg: &SolverConfig) -> Result<SolverTrace> {
    projected_descent(f, x0, cfg)
}

/// Projected descent with escapes to other support subspaces.
///
/// While `||grad f(x_k)|| >= eps_stop`: take a projected step if the
/// projected gradient is at least `eps_stop`, otherwise record `x_k` as a
/// candidate minimizer and take the escape step `x_k - t (I - P_k) grad f(x_k)`.
/// The run ends with [`Termination::EscapesExhausted`] when the escape budget
/// is spent or an escape lands in a support pattern that was already visited.
/// `best_point` is the candidate with the lowest total value.
pub fn solve_l0_multistart(f: &dyn SmoothObjective, x0: &[f64], cfg: &SolverConfig) -> Result<SolverTrace> {
    let mut x = prepare(f, x0, cfg, f.lipschitz_grad())?;
    let escape_limit = cfg.escape_limit.unwrap_or(2 * f.dim());
    let mut rec = Recorder::new(cfg.zero_mode);
    let mut visited: HashSet<SupportPattern> = HashSet::new();
    let mut kind = StepKind::Start;
    let mut termination = Termination::MaxIter;

    for k in 0..=cfg.max_iter {
        let row = rec.push(&x, f.value(&x), kind)?;
        let (support, total) = (row.support.clone(), row.total);
        let revisit = !visited.insert(support.clone());
        if kind == StepKind::Escape && revisit {
            termination = Termination::EscapesExhausted;
            break;
        }

        let g = f.gradient(&x);
        if norm2(&g) < cfg.eps_stop {
            rec.trace.candidates.push((x.clone(), total));
            termination = Termination::Converged;
            break;
        }
        if k == cfg.max_iter {
            break;
        }
        let pg = support.project_unchecked(&g);
        if norm2(&pg) >= cfg.eps_stop {
            x = take_step(&mut rec, &x, cfg.step, &pg, cfg)?;
            kind = StepKind::Projected;
        } else {
            rec.trace.candidates.push((x.clone(), total));
            if rec.trace.escapes >= escape_limit {
                termination = Termination::EscapesExhausted;
                break;
            }
            let cg = support.complement_project_unchecked(&g);
            x = take_step(&mut rec, &x, cfg.step, &cg, cfg)?;
            rec.trace.escapes += 1;
            kind = StepKind::Escape;
        }
    }

    let mut trace = rec.trace;
    trace.termination = termination;
    let best = trace
        .candidates
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .cloned();
    match best {
        Some((p, v)) => {
            trace.best_point = p;
            trace.best_value = v;
        }
        None => {
            let last = trace.last().clone();
            trace.best_point = last.x;
            trace.best_value = last.total;
        }
    }
    Ok(trace)
}

/// Projected descent on `sum_i w_i f_i + ||.||_0`. Requires `t < 1 / max_i L_i`.
/// Trace rows report the weighted sum as `f`.
pub fn solve_weight_sum(
    objectives: &VectorObjective,
    weights: &WeightVector,
    x0: &[f64],
    cfg: &SolverConfig,
) -> Result<SolverTrace> {
    Error::check_dim(objectives.len(), weights.dim())?;
    let g = WeightedSum {
        parts: objectives,
        weights: weights.as_slice(),
    };
    projected_descent(&g, x0, cfg)
}

/// Projected subgradient descent on `phi(F(x)) + ||.||_0`.
///
/// Each step uses `P_k J(x_k)^T g_k` with `g_k` the scalarizer subgradient at
/// `F(x_k)`. There is no `1/L` restriction on the step. The run stops when
/// consecutive scalarized values differ by less than `eps_stop`, or after
/// `max_iter` steps. Subgradient steps are not monotone, so `best_point` is
/// the iterate with the lowest total value seen, not the last one.
pub fn solve_gerstewitz(
    objectives: &VectorObjective,
    scalarizer: &PolyhedralScalarizer,
    x0: &[f64],
    cfg: &SolverConfig,
) -> Result<SolverTrace> {
    Error::check_dim(objectives.len(), scalarizer.dim())?;
    cfg.validate()?;
    let mut x = check_start(objectives.dim(), x0)?;
    if cfg.snap {
        cfg.zero_mode.snap(&mut x);
    }
    let mut rec = Recorder::new(cfg.zero_mode);
    if !scalarizer.is_pareto_safe() {
        rec.trace.warnings.push(
            "scalarizer set A does not satisfy A - R^m_+ ⊂ A; minimizers need not be Pareto optimal"
                .into(),
        );
    }

    let mut kind = StepKind::Start;
    let mut previous: Option<f64> = None;
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut termination = Termination::MaxIter;

    for k in 0..=cfg.max_iter {
        let values = objectives.values(&x);
        let phi = scalarizer.eval_unchecked(&values);
        let row = rec.push(&x, phi, kind)?;
        let support = row.support.clone();
        let total = row.total;
        if best.as_ref().is_none_or(|(_, v)| total < *v) {
            best = Some((x.clone(), total));
        }
        rec.trace.best_history.push(best.as_ref().unwrap().1);

        if previous.is_some_and(|p| (phi - p).abs() < cfg.eps_stop) {
            termination = Termination::Converged;
            break;
        }
        if k == cfg.max_iter {
            break;
        }
        previous = Some(phi);

        let g = scalarizer.subgradient_unchecked(&values);
        let d = support.project_unchecked(&objectives.jacobian_transpose_apply(&x, &g));
        x = take_step(&mut rec, &x, cfg.step, &d, cfg)?;
        kind = StepKind::Subgradient;
    }

    let mut trace = rec.trace;
    trace.termination = termination;
    let (p, v) = best.expect("at least one row recorded");
    trace.best_point = p;
    trace.best_value = v;
    Ok(trace)
}

/// Step `0.9 / (M * L_J)` for [`solve_gerstewitz`], with `M` the scalarizer's
/// Lipschitz modulus and `L_J` a bound on the Jacobian norm over the box.
pub fn default_subgradient_step(
    objectives: &VectorObjective,
    scalarizer: &PolyhedralScalarizer,
    lower: &[f64],
    upper: &[f64],
) -> Result<f64> {
    let lj = objectives.jacobian_bound(lower, upper)?;
    let m = scalarizer.lipschitz_bound();
    if lj * m <= 0.0 {
        return Err(Error::InvalidConfig(
            "Jacobian bound is zero on the box; no default step".into(),
        ));
    }
    Ok(0.9 / (m * lj))
}

/// Per-iterate differences are compared against this to declare two runs
/// equivalent.
pub const EQUIVALENCE_TOL: f64 = 1e-10;

/// Row-by-row comparison of two traces over their common prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceComparison {
    /// `max_i |a.x_i - b.x_i|` for each common row.
    pub max_coord_diff: Vec<f64>,
    pub equivalent: bool,
}

impl TraceComparison {
    pub fn rows(&self) -> usize {
        self.max_coord_diff.len()
    }
}

pub fn compare_traces(a: &SolverTrace, b: &SolverTrace) -> TraceComparison {
    let max_coord_diff: Vec<f64> = a
        .rows
        .iter()
        .zip(&b.rows)
        .map(|(ra, rb)| {
            if ra.x.len() == rb.x.len() {
                crate::vecops::dist_inf(&ra.x, &rb.x)
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let equivalent = !max_coord_diff.is_empty() && max_coord_diff.iter().all(|&d| d < EQUIVALENCE_TOL);
    TraceComparison {
        max_coord_diff,
        equivalent,
    }
}
