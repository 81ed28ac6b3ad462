//! Points, the smooth-objective contract and dense convex quadratics.

use std::ops::Deref;

use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vecops::{all_finite, dot};

/// A finite point in `R^n`, `n >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Empty("point"));
        }
        if !all_finite(&coords) {
            return Err(Error::NonFinite("point"));
        }
        Ok(Point(coords))
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "point dimension must be positive");
        Point(vec![0.0; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.0
    }
}

/// A convex differentiable function with an `L`-Lipschitz gradient.
///
/// `value` and `gradient` take slices of length [`dim`](Self::dim); callers
/// check dimensions once at the boundary (solver entry) rather than on every
/// evaluation.
pub trait SmoothObjective: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    /// A valid Lipschitz constant of the gradient in the Euclidean norm.
    fn lipschitz_grad(&self) -> f64;
}

/// `f(x) = x^T Q x + b^T x + c` with `Q` symmetric positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticObjective {
    q: DMatrix<f64>,
    b: Vec<f64>,
    c: f64,
    lipschitz: f64,
}

const SYMMETRY_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

impl QuadraticObjective {
    /// Builds a quadratic from a symmetric `Q`. Use [`symmetrized`](Self::symmetrized)
    /// for user input that may not be symmetric.
    pub fn new(q: DMatrix<f64>, b: Vec<f64>, c: f64) -> Result<Self> {
        check_square(&q)?;
        check_symmetric(&q)?;
        Self::build(q, b, c)
    }

    /// Builds a quadratic from an arbitrary square `Q`, replacing it by
    /// `(Q + Q^T) / 2`. The quadratic form is unchanged.
    pub fn symmetrized(q: DMatrix<f64>, b: Vec<f64>, c: f64) -> Result<Self> {
        check_square(&q)?;
        let sym = (&q + q.transpose()) * 0.5;
        Self::build(sym, b, c)
    }

    /// Row-major convenience constructor (symmetrizes).
    pub fn from_rows(rows: &[Vec<f64>], b: Vec<f64>, c: f64) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Empty("quadratic matrix"));
        }
        for r in rows {
            if r.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: r.len(),
                });
            }
        }
        let q = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Self::symmetrized(q, b, c)
    }

    fn build(q: DMatrix<f64>, b: Vec<f64>, c: f64) -> Result<Self> {
        let n = q.nrows();
        if n == 0 {
            return Err(Error::Empty("quadratic matrix"));
        }
        Error::check_dim(n, b.len())?;
        if !all_finite(q.as_slice()) || !all_finite(&b) || !c.is_finite() {
            return Err(Error::NonFinite("quadratic coefficients"));
        }
        let min_eig = q.clone().symmetric_eigen().eigenvalues.min();
        if min_eig < -PSD_TOL {
            return Err(Error::NotConvex(min_eig));
        }
        let lipschitz = estimate_lipschitz(&q)?;
        Ok(QuadraticObjective { q, b, c, lipschitz })
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// `x^T Q x + b^T x + c`, checking the dimension.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        Error::check_dim(self.dim(), x.len())?;
        Ok(self.value(x))
    }

    /// `2 Q x + b`, checking the dimension.
    pub fn grad(&self, x: &[f64]) -> Result<Point> {
        Error::check_dim(self.dim(), x.len())?;
        Point::new(self.gradient(x))
    }

    /// Convex combination `sum_i w_i f_i` of quadratics over a common dimension.
    pub fn weighted_sum(parts: &[QuadraticObjective], weights: &[f64]) -> Result<Self> {
        let first = parts.first().ok_or(Error::Empty("objective list"))?;
        Error::check_dim(parts.len(), weights.len())?;
        let n = first.dim();
        let mut q = DMatrix::zeros(n, n);
        let mut b = vec![0.0; n];
        let mut c = 0.0;
        for (p, &w) in parts.iter().zip(weights) {
            Error::check_dim(n, p.dim())?;
            q += &p.q * w;
            for (bi, pi) in b.iter_mut().zip(&p.b) {
                *bi += w * pi;
            }
            c += w * p.c;
        }
        Self::symmetrized(q, b, c)
    }
}

fn check_square(q: &DMatrix<f64>) -> Result<()> {
    if q.nrows() != q.ncols() {
        return Err(Error::NotSquare {
            rows: q.nrows(),
            cols: q.ncols(),
        });
    }
    Ok(())
}

fn check_symmetric(q: &DMatrix<f64>) -> Result<()> {
    let n = q.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (q[(i, j)], q[(j, i)]);
            if (a - b).abs() > SYMMETRY_TOL * (1.0 + a.abs().max(b.abs())) {
                return Err(Error::NonSymmetric { row: i, col: j });
            }
        }
    }
    Ok(())
}

impl SmoothObjective for QuadraticObjective {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let n = self.dim();
        let mut quad = 0.0;
        for i in 0..n {
            let row: f64 = (0..n).map(|j| self.q[(i, j)] * x[j]).sum();
            quad += x[i] * row;
        }
        quad + dot(&self.b, x) + self.c
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let row: f64 = (0..n).map(|j| self.q[(i, j)] * x[j]).sum();
                2.0 * row + self.b[i]
            })
            .collect()
    }

    fn lipschitz_grad(&self) -> f64 {
        self.lipschitz
    }
}

const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITER: usize = 10_000;
const POWER_SEED: u64 = 0x5eed_0f1a;

/// Lipschitz constant `2 * lambda_max(Q)` of `x -> 2Qx + b`.
///
/// Runs power iteration from a seeded random unit vector until the Rayleigh
/// quotient is within `1e-10` (relative) of its limit. If that does not happen
/// within 10 000 iterations, falls back to the Gershgorin bound. A zero
/// matrix yields 0.
pub fn estimate_lipschitz(q: &DMatrix<f64>) -> Result<f64> {
    check_square(q)?;
    check_symmetric(q)?;
    let n = q.nrows();
    if n == 0 {
        return Err(Error::Empty("quadratic matrix"));
    }
    if q.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(POWER_SEED);
    let mut v = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
    if v.norm() == 0.0 {
        v[0] = 1.0;
    }
    v /= v.norm();

    // The Rayleigh quotient increases geometrically towards lambda_max, so the
    // remaining error is about delta * r / (1 - r) with r the ratio of
    // successive changes. Stopping on `delta` alone undershoots badly when
    // the top two eigenvalues are close.
    let mut rayleigh = (q * &v).dot(&v);
    let mut prev_delta = f64::NAN;
    for _ in 0..POWER_MAX_ITER {
        let w = q * &v;
        let norm = w.norm();
        if norm == 0.0 {
            // Start vector landed in the null space; power iteration is stuck.
            break;
        }
        v = w / norm;
        let next = (q * &v).dot(&v);
        let delta = (next - rayleigh).abs();
        let scale = next.abs().max(1.0);
        let ratio = if prev_delta > 0.0 {
            (delta / prev_delta).min(1.0)
        } else {
            0.0
        };
        let tail = if ratio < 1.0 {
            delta * ratio / (1.0 - ratio)
        } else {
            f64::INFINITY
        };
        if delta <= POWER_TOL * scale && tail <= POWER_TOL * scale {
            return Ok(2.0 * next.abs().max(rayleigh.abs()));
        }
        rayleigh = next;
        prev_delta = delta;
    }
    Ok(2.0 * gershgorin_bound(q))
}

fn gershgorin_bound(q: &DMatrix<f64>) -> f64 {
    q.row_iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
