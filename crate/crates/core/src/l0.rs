//! l0 evaluation, support patterns and the limiting subdifferential of `||.||_0`.
//!
//! A [`SupportPattern`] is the boolean diagonal of the 0/1 projection matrix
//! associated with a point: entry `i` is `true` exactly when `x_i` is nonzero.
//! Projecting with it keeps the on-support components and zeroes the rest,
//! so the pattern of `x` fixes `x` and maps any vector onto the coordinate
//! subspace ("projection hyperplane") that `x` lives in.
//!
//! The limiting subdifferential of `||.||_0` at `x` is the subspace of vectors
//! vanishing on the support of `x`. It is stored as an index partition.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default threshold of the tolerance mode.
pub const DEFAULT_ZERO_TOL: f64 = 1e-6;

/// How a component is recognized as zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroMode {
    /// Only `0.0` (and `-0.0`) is zero.
    #[default]
    Exact,
    /// `|x_i| <= eps` is zero.
    Tol(f64),
}

impl ZeroMode {
    pub fn tol() -> Self {
        ZeroMode::Tol(DEFAULT_ZERO_TOL)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ZeroMode::Exact => Ok(()),
            ZeroMode::Tol(eps) if eps > 0.0 && eps.is_finite() => Ok(()),
            ZeroMode::Tol(eps) => Err(Error::InvalidConfig(format!(
                "zero tolerance must be positive and finite, got {eps}"
            ))),
        }
    }

    #[inline]
    pub fn is_zero(&self, v: f64) -> bool {
        match *self {
            ZeroMode::Exact => v == 0.0,
            ZeroMode::Tol(eps) => v.abs() <= eps,
        }
    }

    /// Sets every component this mode considers zero to exact `0.0`.
    /// A no-op in exact mode apart from normalizing `-0.0`.
    pub fn snap(&self, x: &mut [f64]) {
        for v in x.iter_mut() {
            if self.is_zero(*v) {
                *v = 0.0;
            }
        }
    }
}

/// Number of components of `x` that are nonzero under `mode`.
pub fn l0_norm(x: &[f64], mode: ZeroMode) -> usize {
    x.iter().filter(|&&v| !mode.is_zero(v)).count()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SupportPattern {
    mask: Vec<bool>,
}

pub fn support_pattern(x: &[f64], mode: ZeroMode) -> SupportPattern {
    SupportPattern {
        mask: x.iter().map(|&v| !mode.is_zero(v)).collect(),
    }
}

impl SupportPattern {
    pub fn from_mask(mask: Vec<bool>) -> Self {
        SupportPattern { mask }
    }

    pub fn full(n: usize) -> Self {
        SupportPattern {
            mask: vec![true; n],
        }
    }

    pub fn empty(n: usize) -> Self {
        SupportPattern {
            mask: vec![false; n],
        }
    }

    /// Pattern of the subset encoded by the low `n` bits of `bits`
    /// (bit `i` set means coordinate `i` is in the support).
    pub fn from_bits(bits: u64, n: usize) -> Self {
        SupportPattern {
            mask: (0..n).map(|i| bits >> i & 1 == 1).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.mask.len()
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn contains(&self, i: usize) -> bool {
        self.mask[i]
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    /// Componentwise inclusion `self ⊆ other`.
    pub fn is_subset_of(&self, other: &SupportPattern) -> bool {
        self.dim() == other.dim() && self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b)
    }

    /// `v_i` on the support, `0` elsewhere.
    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        Error::check_dim(self.dim(), v.len())?;
        Ok(self.project_unchecked(v))
    }

    /// `v_i` off the support, `0` on it (the `I - P` projection).
    pub fn complement_project(&self, v: &[f64]) -> Result<Vec<f64>> {
        Error::check_dim(self.dim(), v.len())?;
        Ok(self.complement_project_unchecked(v))
    }

    pub(crate) fn project_unchecked(&self, v: &[f64]) -> Vec<f64> {
        self.mask
            .iter()
            .zip(v)
            .map(|(&m, &vi)| if m { vi } else { 0.0 })
            .collect()
    }

    pub(crate) fn complement_project_unchecked(&self, v: &[f64]) -> Vec<f64> {
        self.mask
            .iter()
            .zip(v)
            .map(|(&m, &vi)| if m { 0.0 } else { vi })
            .collect()
    }

    /// Bitstring with one character per coordinate, `1` on the support.
    pub fn to_bitstring(&self) -> String {
        self.mask.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

impl fmt::Display for SupportPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bitstring())
    }
}

impl FromStr for SupportPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mask = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::InvalidConfig(format!("bad support bitstring `{s}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SupportPattern { mask })
    }
}

/// The subdifferential `{v : v_i = 0 for x_i != 0}` as an index partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubdifferentialDescription {
    /// Indices where every subgradient vanishes (the support of the base point).
    pub fixed_zero_indices: Vec<usize>,
    /// Indices where a subgradient may take any real value.
    pub free_indices: Vec<usize>,
}

pub fn l0_subdifferential(x: &[f64], mode: ZeroMode) -> SubdifferentialDescription {
    let (fixed, free): (Vec<usize>, Vec<usize>) = (0..x.len()).partition(|&i| !mode.is_zero(x[i]));
    SubdifferentialDescription {
        fixed_zero_indices: fixed,
        free_indices: free,
    }
}

impl SubdifferentialDescription {
    pub fn dim(&self) -> usize {
        self.fixed_zero_indices.len() + self.free_indices.len()
    }

    /// Whether `v` is a limiting subgradient of `||.||_0` at the base point.
    pub fn contains(&self, v: &[f64]) -> Result<bool> {
        Error::check_dim(self.dim(), v.len())?;
        Ok(self.fixed_zero_indices.iter().all(|&i| v[i] == 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn l0_examples() {
        assert_eq!(l0_norm(&[0.0, -1.0, 4.0], ZeroMode::Exact), 2);
        assert_eq!(l0_norm(&[0.0, 0.0, 0.0], ZeroMode::Exact), 0);
        assert_eq!(l0_norm(&[1.0, 2.0, 3.0], ZeroMode::Exact), 3);
        assert_eq!(l0_norm(&[1e-8, 2.0], ZeroMode::Tol(1e-6)), 1);
        assert_eq!(l0_norm(&[-0.0, 2.0], ZeroMode::Exact), 1);
    }

    #[test]
    fn support_examples() {
        let p = support_pattern(&[0.0, 2.0, -3.0], ZeroMode::Exact);
        assert_eq!(p.mask(), &[false, true, true]);
        assert_eq!(p.to_bitstring(), "011");
        assert_eq!(support_pattern(&[0.0, 0.0], ZeroMode::Exact).mask(), &[false, false]);
        assert_eq!(support_pattern(&[5e-7, 1.0], ZeroMode::Tol(1e-6)).mask(), &[false, true]);
    }

    #[test]
    fn projection_examples() {
        let p = SupportPattern::from_mask(vec![false, true, true]);
        assert_eq!(p.project(&[7.0, 2.0, -3.0]).unwrap(), vec![0.0, 2.0, -3.0]);
        let x = [0.0, 2.0, -3.0];
        assert_eq!(support_pattern(&x, ZeroMode::Exact).project(&x).unwrap(), x.to_vec());

        let p = SupportPattern::from_mask(vec![false, true]);
        assert_eq!(p.complement_project(&[4.0, -6.0]).unwrap(), vec![4.0, 0.0]);
        assert_eq!(SupportPattern::full(2).complement_project(&[4.0, -6.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(SupportPattern::empty(2).complement_project(&[4.0, -6.0]).unwrap(), vec![4.0, -6.0]);
        assert!(p.project(&[1.0]).is_err());
    }

    #[test]
    fn subdifferential_cases() {
        let d = l0_subdifferential(&[1.0, 2.0], ZeroMode::Exact);
        assert_eq!(d.fixed_zero_indices, vec![0, 1]);
        assert!(d.free_indices.is_empty());
        assert!(d.contains(&[0.0, 0.0]).unwrap());
        assert!(!d.contains(&[0.1, 0.0]).unwrap());

        let d = l0_subdifferential(&[0.0, 3.0], ZeroMode::Exact);
        assert_eq!(d.free_indices, vec![0]);
        assert!(d.contains(&[17.0, 0.0]).unwrap());
        assert!(!d.contains(&[17.0, 1.0]).unwrap());

        let d = l0_subdifferential(&[0.0, 0.0], ZeroMode::Exact);
        assert_eq!(d.free_indices, vec![0, 1]);
        assert!(d.contains(&[-4.0, 9.0]).unwrap());
    }

    #[test]
    fn bitstring_round_trip() {
        let p = SupportPattern::from_bits(0b101, 3);
        assert_eq!(p.to_bitstring(), "101");
        assert_eq!("101".parse::<SupportPattern>().unwrap(), p);
        assert!("10x".parse::<SupportPattern>().is_err());
    }

    fn vec_and_mode() -> impl Strategy<Value = (Vec<f64>, ZeroMode)> {
        let coord = prop_oneof![Just(0.0), Just(-0.0), -1e-6..1e-6f64, -10.0..10.0f64];
        (
            prop::collection::vec(coord, 1..8),
            prop_oneof![Just(ZeroMode::Exact), Just(ZeroMode::Tol(1e-6))],
        )
    }

    proptest! {
        #[test]
        fn l0_matches_pattern_count((x, mode) in vec_and_mode()) {
            let p = support_pattern(&x, mode);
            prop_assert_eq!(l0_norm(&x, mode), p.count());
            prop_assert!(l0_norm(&x, mode) <= x.len());
        }

        #[test]
        fn l0_scale_invariant((x, _) in vec_and_mode(), alpha in prop_oneof![-5.0..-0.1f64, 0.1..5.0f64]) {
            let scaled: Vec<f64> = x.iter().map(|v| alpha * v).collect();
            prop_assert_eq!(l0_norm(&scaled, ZeroMode::Exact), l0_norm(&x, ZeroMode::Exact));
        }

        #[test]
        fn projections_split_identity((x, mode) in vec_and_mode(), seed in prop::collection::vec(-5.0..5.0f64, 8)) {
            let p = support_pattern(&x, mode);
            let v = &seed[..x.len()];
            let a = p.project(v).unwrap();
            prop_assert_eq!(p.project(&a).unwrap(), a.clone());
            let b = p.complement_project(v).unwrap();
            for i in 0..v.len() {
                prop_assert_eq!(a[i] + b[i], v[i]);
            }
        }

        #[test]
        fn projection_is_linear(mask in prop::collection::vec(any::<bool>(), 4),
                                u in prop::collection::vec(-5.0..5.0f64, 4),
                                v in prop::collection::vec(-5.0..5.0f64, 4),
                                alpha in -3.0..3.0f64) {
            let p = SupportPattern::from_mask(mask);
            let lhs = p.project(&u.iter().zip(&v).map(|(a, b)| alpha * a + b).collect::<Vec<_>>()).unwrap();
            let pu = p.project(&u).unwrap();
            let pv = p.project(&v).unwrap();
            for i in 0..4 {
                prop_assert!((lhs[i] - (alpha * pu[i] + pv[i])).abs() < 1e-12);
            }
        }

        #[test]
        fn membership_accepts_exactly_vectors_vanishing_on_support(
            (x, mode) in vec_and_mode(),
            cands in prop::collection::vec((prop::collection::vec(any::<bool>(), 8), prop::collection::vec(-5.0..5.0f64, 8)), 100)
        ) {
            let d = l0_subdifferential(&x, mode);
            let supp = support_pattern(&x, mode);
            prop_assert_eq!(&d.fixed_zero_indices, &supp.indices().collect::<Vec<_>>());
            prop_assert!(d.contains(&vec![0.0; x.len()]).unwrap());
            for (zero_it, vals) in cands {
                let v: Vec<f64> = (0..x.len()).map(|i| if zero_it[i] { 0.0 } else { vals[i] }).collect();
                let vanishes = supp.indices().all(|i| v[i] == 0.0);
                prop_assert_eq!(d.contains(&v).unwrap(), vanishes);
            }
        }

        #[test]
        fn nested_patterns_give_monotone_l0(
            pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 1..8),
            v in prop::collection::vec(-5.0..5.0f64, 8)
        ) {
            let small = SupportPattern::from_mask(pairs.iter().map(|&(a, b)| a && b).collect());
            let large = SupportPattern::from_mask(pairs.iter().map(|&(a, _)| a).collect());
            prop_assert!(small.is_subset_of(&large));
            let v = &v[..pairs.len()];
            prop_assert!(l0_norm(&small.project(v).unwrap(), ZeroMode::Exact)
                <= l0_norm(&large.project(v).unwrap(), ZeroMode::Exact));
        }
    }
}
