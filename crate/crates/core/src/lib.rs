//! Optimization with the l0 "norm" (number of nonzero components).
//!
//! The crate covers single-objective problems `min f(x) + ||x||_0` and
//! multiobjective problems whose components are `f_i(x) + ||x||_0`, where
//! every `f` is convex with a Lipschitz gradient.
//!
//! * [`objective`]: points, the [`SmoothObjective`] contract and dense quadratics.
//! * [`l0`]: l0 evaluation, support patterns (diagonal 0/1 projections) and the
//!   limiting subdifferential of the l0 function.
//! * [`scalarize`]: the Gerstewitz scalarization function over polyhedral sets
//!   and the weight-sum scalarization.
//! * [`solvers`]: projected-support descent, the multi-minimizer escape variant,
//!   weight-sum descent and Gerstewitz subgradient descent, all with traces.
//! * [`oracle`]: brute-force enumeration of all support subspaces for
//!   quadratics, plus a grid falsifier for local Pareto optimality.
//! * [`problems`]: built-in example problems and a seeded random generator.
//! * [`selftest`]: the acceptance checks, runnable from tests and the CLI.

pub mod error;
pub mod l0;
pub mod objective;
pub mod oracle;
pub mod problems;
pub mod scalarize;
pub mod selftest;
pub mod solvers;

mod vecops;

pub use error::{Error, Result};
pub use l0::{SupportPattern, ZeroMode};
pub use objective::{Point, QuadraticObjective, SmoothObjective};
pub use scalarize::{Halfspace, PolyhedralScalarizer, WeightVector};
pub use solvers::{compare_traces, SolverConfig, SolverTrace, Termination, TraceComparison, VectorObjective};
