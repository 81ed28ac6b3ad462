//! Brute-force verification for quadratic problems.
//!
//! A point minimizing `f` over the coordinate subspace of its own support is
//! a local minimizer of `f + ||.||_0`. For a quadratic there are only `2^n`
//! such subspaces and each restricted problem is a linear solve, so every
//! candidate local minimizer can be listed. The solves here use direct
//! factorizations and never call into [`crate::solvers`].

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::l0::{l0_norm, support_pattern, SupportPattern, ZeroMode};
use crate::objective::{QuadraticObjective, SmoothObjective};
use crate::solvers::VectorObjective;
use crate::vecops::dist_inf;

/// Hard limit on `n` for enumeration.
pub const MAX_ENUMERATION_DIM: usize = 20;
/// Default limit used by the CLI.
pub const DEFAULT_ENUMERATION_DIM: usize = 12;
/// Components of a restricted minimizer below this magnitude are treated as
/// zero when computing its effective l0 value.
pub const EFFECTIVE_ZERO: f64 = 1e-12;
/// Residual tolerance for projected stationarity of catalog entries.
pub const STATIONARITY_TOL: f64 = 1e-9;
/// Largest `n` accepted by [`pareto_grid_check`].
pub const MAX_GRID_DIM: usize = 3;
/// Comparison margin in [`pareto_grid_check`].
pub const DOMINANCE_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryStatus {
    /// Restricted Hessian is positive definite; unique minimizer.
    Unique,
    /// Singular but consistent restricted system; least-norm minimizer.
    LeastNorm,
    /// Singular and inconsistent: `f` is unbounded below on the subspace.
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    /// The subset `S` the minimization was restricted to.
    pub support: SupportPattern,
    pub minimizer: Vec<f64>,
    pub value: f64,
    /// l0 of the minimizer itself, which may be smaller than `|S|`.
    pub effective_l0: usize,
    pub total: f64,
    pub status: EntryStatus,
}

impl CatalogEntry {
    /// The minimizer over `S` is a local minimizer of `f + ||.||_0` when its
    /// own support is all of `S` (otherwise it belongs to a smaller subspace
    /// and is listed there).
    pub fn is_local_min(&self) -> bool {
        self.status != EntryStatus::Unbounded && self.effective_l0 == self.support.count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportCatalog {
    /// One entry per subset, in increasing order of the subset bitmask
    /// (bit `i` ↔ coordinate `i`).
    pub entries: Vec<CatalogEntry>,
}

impl SupportCatalog {
    /// Smallest total value among bounded entries.
    pub fn global_best_value(&self) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.status != EntryStatus::Unbounded)
            .map(|e| e.total)
            .fold(f64::INFINITY, f64::min)
    }

    /// Distinct global minimizers: local-minimizer entries attaining the best
    /// total within `tol`. A minimizer that collapsed onto a smaller support
    /// is reported once, under that support.
    pub fn global_best(&self, tol: f64) -> Vec<&CatalogEntry> {
        let best = self.global_best_value();
        self.local_minimizers().filter(|e| e.total <= best + tol).collect()
    }

    pub fn local_minimizers(&self) -> impl Iterator<Item = &CatalogEntry> {
        self.entries.iter().filter(|e| e.is_local_min())
    }
}

/// Solves `min f` over every coordinate subspace.
pub fn enumerate_supports(f: &QuadraticObjective) -> Result<SupportCatalog> {
    enumerate_supports_capped(f, MAX_ENUMERATION_DIM)
}

/// As [`enumerate_supports`] with a lower cap on `n`.
pub fn enumerate_supports_capped(f: &QuadraticObjective, cap: usize) -> Result<SupportCatalog> {
    let n = f.dim();
    let cap = cap.min(MAX_ENUMERATION_DIM);
    if n > cap {
        return Err(Error::TooLarge { n, cap });
    }
    let entries = (0..1u64 << n)
        .into_par_iter()
        .map(|bits| restricted_minimizer(f, SupportPattern::from_bits(bits, n)))
        .collect();
    Ok(SupportCatalog { entries })
}

fn restricted_minimizer(f: &QuadraticObjective, support: SupportPattern) -> CatalogEntry {
    let n = f.dim();
    let idx: Vec<usize> = support.indices().collect();
    let s = idx.len();
    let mut x = vec![0.0; n];
    let mut status = EntryStatus::Unique;

    if s > 0 {
        // Stationarity on the subspace: 2 Q_SS x_S = -b_S.
        let h = DMatrix::from_fn(s, s, |i, j| 2.0 * f.q()[(idx[i], idx[j])]);
        let rhs = DVector::from_fn(s, |i, _| -f.b()[idx[i]]);
        let sol = match h.clone().cholesky() {
            Some(chol) if chol.l().diagonal().iter().all(|d| *d > 1e-10) => chol.solve(&rhs),
            _ => {
                status = EntryStatus::LeastNorm;
                let svd = h.clone().svd(true, true);
                let eps = 1e-10 * svd.singular_values.max().max(1.0);
                svd.solve(&rhs, eps).unwrap_or_else(|_| DVector::zeros(s))
            }
        };
        let residual = (&h * &sol - &rhs).amax();
        if residual > STATIONARITY_TOL * (1.0 + rhs.amax()) {
            status = EntryStatus::Unbounded;
        }
        for (k, &i) in idx.iter().enumerate() {
            x[i] = if sol[k].abs() < EFFECTIVE_ZERO { 0.0 } else { sol[k] };
        }
    }

    let value = f.value(&x);
    let effective_l0 = l0_norm(&x, ZeroMode::Exact);
    let total = if status == EntryStatus::Unbounded {
        f64::NEG_INFINITY
    } else {
        value + effective_l0 as f64
    };
    CatalogEntry {
        support,
        minimizer: x,
        value,
        effective_l0,
        total,
        status,
    }
}

/// True iff `x` lies within `tol` (max norm) of the restricted minimizer of
/// the catalog entry whose subset is the exact support of `x`.
pub fn verify_local_min(f: &QuadraticObjective, x: &[f64], tol: f64) -> Result<bool> {
    Error::check_dim(f.dim(), x.len())?;
    let catalog = enumerate_supports(f)?;
    Ok(verify_against(&catalog, x, tol))
}

/// [`verify_local_min`] against a precomputed catalog.
pub fn verify_against(catalog: &SupportCatalog, x: &[f64], tol: f64) -> bool {
    let support = support_pattern(x, ZeroMode::Exact);
    catalog
        .entries
        .iter()
        .find(|e| e.support == support)
        .is_some_and(|e| e.status != EntryStatus::Unbounded && dist_inf(&e.minimizer, x) <= tol)
}

/// Grid falsifier for local Pareto optimality of `x` for the objectives
/// `F_i = f_i + ||.||_0`.
///
/// Samples every point of the grid with spacing `grid_step` in the max-norm
/// ball of the given radius around `x`. Coordinates within `grid_step` of zero
/// are snapped to exact zero so that coordinate subspaces are sampled. Returns
/// false as soon as some sample dominates `x`: no objective worse by more than
/// `1e-9` and at least one better by more than `1e-9`.
pub fn pareto_grid_check(
    objectives: &VectorObjective,
    x: &[f64],
    radius: f64,
    grid_step: f64,
) -> Result<bool> {
    let n = objectives.dim();
    Error::check_dim(n, x.len())?;
    if n > MAX_GRID_DIM {
        return Err(Error::TooLarge {
            n,
            cap: MAX_GRID_DIM,
        });
    }
    if !(radius > 0.0 && grid_step > 0.0 && grid_step <= radius) {
        return Err(Error::InvalidConfig(format!(
            "need 0 < grid_step <= radius, got step {grid_step}, radius {radius}"
        )));
    }

    let l0x = l0_norm(x, ZeroMode::Exact) as f64;
    let base: Vec<f64> = objectives.values(x).iter().map(|v| v + l0x).collect();
    let half = (radius / grid_step).round() as i64;
    let per_axis = (2 * half + 1) as usize;
    let total = per_axis.pow(n as u32);

    let mut z = vec![0.0; n];
    for flat in 0..total {
        let mut rem = flat;
        for i in 0..n {
            let offset = (rem % per_axis) as i64 - half;
            rem /= per_axis;
            let zi = x[i] + offset as f64 * grid_step;
            z[i] = if zi.abs() < grid_step { 0.0 } else { zi };
        }
        let l0z = l0_norm(&z, ZeroMode::Exact) as f64;
        let mut no_worse = true;
        let mut some_better = false;
        for (c, &fx) in objectives.components().iter().zip(&base) {
            let fz = c.value(&z) + l0z;
            if fz > fx + DOMINANCE_MARGIN {
                no_worse = false;
                break;
            }
            if fz < fx - DOMINANCE_MARGIN {
                some_better = true;
            }
        }
        if no_worse && some_better {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems;

    fn ex1() -> QuadraticObjective {
        problems::builtin("ex1_scalar").unwrap().objectives[0].clone()
    }

    #[test]
    fn example_catalog() {
        let cat = enumerate_supports(&ex1()).unwrap();
        assert_eq!(cat.entries.len(), 4);
        let expected = [
            ([0.0, 0.0], 0, 3.0, true),
            ([1.0, 0.0], 1, 3.0, true),
            ([0.0, 0.0], 0, 3.0, false),
            ([2.0, 1.0], 2, 3.0, true),
        ];
        for (e, (x, l0, total, local)) in cat.entries.iter().zip(expected) {
            assert!(dist_inf(&e.minimizer, &x) < 1e-12, "{e:?}");
            assert_eq!(e.effective_l0, l0);
            assert!((e.total - total).abs() < 1e-12);
            assert_eq!(e.is_local_min(), local);
        }
        assert_eq!(cat.local_minimizers().count(), 3);
        assert!((cat.global_best_value() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn isotropic_catalog() {
        let f = QuadraticObjective::symmetrized(DMatrix::identity(3, 3), vec![0.0; 3], 0.0).unwrap();
        let cat = enumerate_supports(&f).unwrap();
        assert_eq!(cat.entries.len(), 8);
        assert!(cat.entries.iter().all(|e| e.minimizer == vec![0.0; 3]));
        assert_eq!(cat.global_best_value(), 0.0);
    }

    #[test]
    fn one_dimensional_catalog() {
        // (x - 3)^2 = x^2 - 6x + 9
        let f = QuadraticObjective::from_rows(&[vec![1.0]], vec![-6.0], 9.0).unwrap();
        let cat = enumerate_supports(&f).unwrap();
        assert_eq!(cat.entries[0].total, 9.0);
        assert!((cat.entries[1].minimizer[0] - 3.0).abs() < 1e-12);
        assert!((cat.entries[1].total - 1.0).abs() < 1e-12);
        let best = cat.global_best(1e-12);
        assert_eq!(best.len(), 1);
        assert!((best[0].minimizer[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn singular_restricted_systems() {
        // f = x^2 + y: unbounded below on any subspace containing y.
        let f = QuadraticObjective::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]], vec![0.0, 1.0], 0.0)
            .unwrap();
        let cat = enumerate_supports(&f).unwrap();
        assert_eq!(cat.entries[1].status, EntryStatus::Unique);
        assert_eq!(cat.entries[2].status, EntryStatus::Unbounded);
        assert_eq!(cat.entries[3].status, EntryStatus::Unbounded);
        // f = x^2: flat in y, least-norm minimizer.
        let f = QuadraticObjective::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]], vec![0.0, 0.0], 0.0)
            .unwrap();
        let cat = enumerate_supports(&f).unwrap();
        assert_eq!(cat.entries[3].status, EntryStatus::LeastNorm);
        assert_eq!(cat.entries[3].minimizer, vec![0.0, 0.0]);
    }

    #[test]
    fn verify_examples() {
        let f = ex1();
        assert!(verify_local_min(&f, &[1.0, 0.0], 1e-6).unwrap());
        assert!(!verify_local_min(&f, &[1.5, 0.0], 1e-6).unwrap());
        assert!(verify_local_min(&f, &[2.0, 1.0], 1e-6).unwrap());
        assert!(verify_local_min(&f, &[0.0, 0.0], 1e-6).unwrap());
        assert!(verify_local_min(&f, &[0.0, 1e-7], 1e-6).unwrap());
    }

    #[test]
    fn too_large() {
        let f = QuadraticObjective::symmetrized(DMatrix::identity(13, 13), vec![0.0; 13], 0.0).unwrap();
        assert!(matches!(
            enumerate_supports_capped(&f, DEFAULT_ENUMERATION_DIM),
            Err(Error::TooLarge { n: 13, cap: 12 })
        ));
    }

    #[test]
    fn pareto_examples() {
        let p = problems::builtin("ex2_biobjective").unwrap();
        let objectives = VectorObjective::from_quadratics(p.objectives).unwrap();
        assert!(pareto_grid_check(&objectives, &[0.5, 1.0], 0.2, 0.01).unwrap());
        assert!(!pareto_grid_check(&objectives, &[10.0, 10.0], 0.2, 0.01).unwrap());
        let big = VectorObjective::from_quadratics(vec![QuadraticObjective::symmetrized(
            DMatrix::identity(4, 4),
            vec![0.0; 4],
            0.0,
        )
        .unwrap()])
        .unwrap();
        assert!(pareto_grid_check(&big, &[0.0; 4], 0.2, 0.1).is_err());
    }

    #[test]
    fn single_objective_grid_agrees_with_catalog() {
        let f = ex1();
        let objectives = VectorObjective::from_quadratics(vec![f.clone()]).unwrap();
        for x in [[1.0, 0.0], [2.0, 1.0], [0.0, 0.0], [1.5, 0.0], [2.0, 0.5], [0.7, 0.3]] {
            assert_eq!(
                pareto_grid_check(&objectives, &x, 0.2, 0.01).unwrap(),
                verify_local_min(&f, &x, 1e-9).unwrap(),
                "at {x:?}"
            );
        }
    }
}
