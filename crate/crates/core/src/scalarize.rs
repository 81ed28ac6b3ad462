//! Gerstewitz scalarization over polyhedral sets, and weight-sum scalarization.
//!
//! For a set `A ⊂ R^m` and a direction `k0`, the Gerstewitz function is
//!
//! ```text
//! phi(y) = inf { t : y ∈ t*k0 + A }
//! ```
//!
//! When `A = { y : <a_i, y> <= b_i, i = 1..p }` and every `<a_i, k0> > 0`,
//! `y ∈ t*k0 + A` holds iff `t >= (<a_i, y> - b_i) / <a_i, k0>` for all `i`, so
//!
//! ```text
//! phi(y) = max_i (<a_i, y> - b_i) / <a_i, k0>
//! ```
//!
//! a finite, convex, piecewise-affine function. Each piece has gradient
//! `a_i / <a_i, k0>`, whose inner product with `k0` is 1.
//!
//! If every normal is componentwise nonnegative then `A - R^m_+ ⊂ A` and `phi`
//! is monotone for the componentwise order; such scalarizers are flagged
//! [`pareto_safe`](PolyhedralScalarizer::is_pareto_safe).

use crate::error::{Error, Result};
use crate::vecops::{dot, norm2};

/// Tolerance for `<a_i, k0> > 0`.
pub const DIRECTION_TOL: f64 = 1e-12;
/// Pieces within this distance of the maximum count as active.
pub const ACTIVE_TOL: f64 = 1e-9;
/// Tolerance on `sum(w) = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// The closed halfspace `{ y : <normal, y> <= offset }`.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Halfspace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Self {
        Halfspace { normal, offset }
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        dot(&self.normal, y) <= self.offset
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyhedralScalarizer {
    halfspaces: Vec<Halfspace>,
    k0: Vec<f64>,
    /// `<a_i, k0>` per halfspace, all positive.
    scales: Vec<f64>,
    pareto_safe: bool,
}

impl PolyhedralScalarizer {
    /// Validates the polyhedron and direction.
    ///
    /// Fails if the list is empty, dimensions disagree, some normal is zero,
    /// or some `<a_i, k0> <= 1e-12` (the function would not be finite-valued).
    pub fn new(halfspaces: Vec<Halfspace>, k0: Vec<f64>) -> Result<Self> {
        if halfspaces.is_empty() {
            return Err(Error::Empty("halfspace list"));
        }
        let m = k0.len();
        if m == 0 {
            return Err(Error::Empty("direction k0"));
        }
        if !k0.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("direction k0"));
        }
        let mut scales = Vec::with_capacity(halfspaces.len());
        for (index, h) in halfspaces.iter().enumerate() {
            Error::check_dim(m, h.normal.len())?;
            if !h.normal.iter().all(|v| v.is_finite()) || !h.offset.is_finite() {
                return Err(Error::NonFinite("halfspace"));
            }
            if h.normal.iter().all(|&v| v == 0.0) {
                return Err(Error::ZeroNormal { index });
            }
            let value = dot(&h.normal, &k0);
            if value <= DIRECTION_TOL {
                return Err(Error::ScalarizerNotFinite { index, value });
            }
            scales.push(value);
        }
        let pareto_safe = halfspaces
            .iter()
            .all(|h| h.normal.iter().all(|&v| v >= 0.0));
        Ok(PolyhedralScalarizer {
            halfspaces,
            k0,
            scales,
            pareto_safe,
        })
    }

    /// Uses `k0 = (1, ..., 1)`.
    pub fn with_unit_direction(halfspaces: Vec<Halfspace>) -> Result<Self> {
        let m = halfspaces.first().map_or(0, |h| h.normal.len());
        Self::new(halfspaces, vec![1.0; m])
    }

    /// `A = R^m_-` (nonpositive orthant) with `k0 = 1`: `phi(y) = max_i y_i`.
    pub fn max_scalarizer(m: usize) -> Self {
        let halfspaces = (0..m)
            .map(|i| {
                let mut a = vec![0.0; m];
                a[i] = 1.0;
                Halfspace::new(a, 0.0)
            })
            .collect();
        Self::with_unit_direction(halfspaces).expect("orthant scalarizer is valid")
    }

    pub fn dim(&self) -> usize {
        self.k0.len()
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn direction(&self) -> &[f64] {
        &self.k0
    }

    pub fn is_pareto_safe(&self) -> bool {
        self.pareto_safe
    }

    /// True when every offset is zero, i.e. `A` is a cone.
    pub fn is_conic(&self) -> bool {
        self.halfspaces.iter().all(|h| h.offset == 0.0)
    }

    /// Lipschitz modulus `max_i ||a_i|| / <a_i, k0>` in the Euclidean norm.
    pub fn lipschitz_bound(&self) -> f64 {
        self.halfspaces
            .iter()
            .zip(&self.scales)
            .map(|(h, s)| norm2(&h.normal) / s)
            .fold(0.0, f64::max)
    }

    fn pieces<'a>(&'a self, y: &'a [f64]) -> impl Iterator<Item = f64> + 'a {
        self.halfspaces
            .iter()
            .zip(&self.scales)
            .map(move |(h, s)| (dot(&h.normal, y) - h.offset) / s)
    }

    pub fn eval(&self, y: &[f64]) -> Result<f64> {
        Error::check_dim(self.dim(), y.len())?;
        Ok(self.eval_unchecked(y))
    }

    pub(crate) fn eval_unchecked(&self, y: &[f64]) -> f64 {
        self.pieces(y).fold(f64::NEG_INFINITY, f64::max)
    }

    /// A subgradient `a_i / <a_i, k0>` for the lowest index `i` whose piece is
    /// within `1e-9` of the maximum.
    pub fn subgradient(&self, y: &[f64]) -> Result<Vec<f64>> {
        Error::check_dim(self.dim(), y.len())?;
        Ok(self.subgradient_unchecked(y))
    }

    pub(crate) fn subgradient_unchecked(&self, y: &[f64]) -> Vec<f64> {
        let values: Vec<f64> = self.pieces(y).collect();
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let active = values
            .iter()
            .position(|&v| v >= max - ACTIVE_TOL)
            .unwrap_or(0);
        let s = self.scales[active];
        self.halfspaces[active].normal.iter().map(|a| a / s).collect()
    }
}

/// Nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty("weight vector"));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidWeights(format!(
                "weights must be finite and nonnegative, got {w}"
            )));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidWeights(format!(
                "weights must sum to 1, got {sum}"
            )));
        }
        Ok(WeightVector(weights))
    }

    pub fn uniform(m: usize) -> Self {
        WeightVector(vec![1.0 / m as f64; m])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// `sum_i w_i * values_i`.
pub fn weight_sum_eval(w: &WeightVector, values: &[f64]) -> Result<f64> {
    Error::check_dim(w.dim(), values.len())?;
    Ok(dot(&w.0, values))
}

/// The single-halfspace scalarizer `{ y : <w, y> <= 0 }` with `k0 = 1`, whose
/// Gerstewitz function is the weighted sum. Every weight must be positive:
/// a zero weight makes the scalarizer blind to that objective, so the Pareto
/// claim for its minimizers would only be weak.
pub fn scalarizer_from_weights(w: &WeightVector) -> Result<PolyhedralScalarizer> {
    if let Some(i) = w.0.iter().position(|&v| v <= 0.0) {
        return Err(Error::InvalidWeights(format!(
            "weight {i} is zero; the halfspace scalarizer needs strictly positive weights"
        )));
    }
    PolyhedralScalarizer::with_unit_direction(vec![Halfspace::new(w.0.clone(), 0.0)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sum_scalarizer() -> PolyhedralScalarizer {
        PolyhedralScalarizer::with_unit_direction(vec![Halfspace::new(vec![1.0, 1.0], 0.0)]).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let s = sum_scalarizer();
        assert_eq!(s.eval(&[3.0, 5.0]).unwrap(), 4.0);
        assert_eq!(s.eval(&[-1.0, 2.0]).unwrap(), 0.5);

        let max = PolyhedralScalarizer::max_scalarizer(2);
        assert_eq!(max.eval(&[3.0, 5.0]).unwrap(), 5.0);

        let s = PolyhedralScalarizer::with_unit_direction(vec![Halfspace::new(vec![2.0, 1.0], 0.0)])
            .unwrap();
        assert!((s.eval(&[3.0, 0.0]).unwrap() - 2.0).abs() < 1e-15);
        let w = WeightVector::new(vec![2.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!((weight_sum_eval(&w, &[3.0, 0.0]).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn boundary_point_of_shifted_set() {
        // y = lambda*k0 + z with z on the boundary of A gives phi(y) = lambda.
        let s = PolyhedralScalarizer::new(
            vec![Halfspace::new(vec![1.0, 0.5], 2.0), Halfspace::new(vec![0.0, 1.0], 1.0)],
            vec![1.0, 2.0],
        )
        .unwrap();
        let z = [1.5, 1.0]; // both constraints tight
        for lambda in [-3.0, 0.0, 0.25, 7.0] {
            let y = [z[0] + lambda * 1.0, z[1] + lambda * 2.0];
            assert!((s.eval(&y).unwrap() - lambda).abs() < 1e-12);
        }
    }

    #[test]
    fn subgradient_examples() {
        let max = PolyhedralScalarizer::max_scalarizer(2);
        assert_eq!(max.subgradient(&[3.0, 1.0]).unwrap(), vec![1.0, 0.0]);
        assert_eq!(max.subgradient(&[1.0, 3.0]).unwrap(), vec![0.0, 1.0]);
        // Tie goes to the lowest index.
        assert_eq!(max.subgradient(&[2.0, 2.0]).unwrap(), vec![1.0, 0.0]);

        let s = sum_scalarizer();
        for y in [[0.0, 0.0], [10.0, -3.0]] {
            assert_eq!(s.subgradient(&y).unwrap(), vec![0.5, 0.5]);
        }
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            PolyhedralScalarizer::with_unit_direction(vec![Halfspace::new(vec![1.0, -1.0], 0.0)]),
            Err(Error::ScalarizerNotFinite { index: 0, .. })
        ));
        assert!(matches!(
            PolyhedralScalarizer::new(vec![Halfspace::new(vec![0.0, 0.0], 0.0)], vec![1.0, 1.0]),
            Err(Error::ZeroNormal { index: 0 })
        ));
        assert!(PolyhedralScalarizer::new(vec![], vec![1.0]).is_err());
        assert!(PolyhedralScalarizer::new(vec![Halfspace::new(vec![1.0], 0.0)], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn pareto_safety_flag() {
        assert!(sum_scalarizer().is_pareto_safe());
        let s = PolyhedralScalarizer::with_unit_direction(vec![Halfspace::new(vec![2.0, -1.0], 0.0)])
            .unwrap();
        assert!(!s.is_pareto_safe());
    }

    #[test]
    fn weights() {
        assert!(WeightVector::new(vec![0.5, 0.6]).is_err());
        assert!(WeightVector::new(vec![-0.5, 1.5]).is_err());
        assert!(WeightVector::new(vec![]).is_err());
        let w = WeightVector::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(weight_sum_eval(&w, &[2.0, 4.0]).unwrap(), 3.0);
        let w = WeightVector::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(weight_sum_eval(&w, &[7.0, 4.0, -2.0]).unwrap(), 7.0);
        assert!(weight_sum_eval(&w, &[1.0]).is_err());
        assert!(scalarizer_from_weights(&w).is_err());
    }

    #[test]
    fn weights_to_halfspace() {
        let w = WeightVector::new(vec![2.0 / 3.0, 1.0 / 3.0]).unwrap();
        let s = scalarizer_from_weights(&w).unwrap();
        assert_eq!(s.halfspaces()[0].normal, vec![2.0 / 3.0, 1.0 / 3.0]);
        assert_eq!(s.halfspaces()[0].offset, 0.0);
        assert_eq!(s.direction(), &[1.0, 1.0]);
        for y in [[3.0, 0.0], [-1.25, 8.5], [1e3, -7.0]] {
            assert_eq!(s.eval(&y).unwrap(), weight_sum_eval(&w, &y).unwrap());
        }
    }
}
