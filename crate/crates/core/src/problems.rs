//! Built-in example problems and a seeded random-quadratic generator.

use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::objective::QuadraticObjective;

pub const BUILTIN_NAMES: [&str; 3] = ["ex1_scalar", "ex2_biobjective", "ex3_max"];

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub name: String,
    pub objectives: Vec<QuadraticObjective>,
    /// Known local minimizers of `f + ||.||_0` with their total values.
    pub intended_minimizers: Vec<(Vec<f64>, f64)>,
    pub notes: String,
}

impl ProblemSpec {
    pub fn dim(&self) -> usize {
        self.objectives[0].b().len()
    }
}

fn quad(rows: &[&[f64]], b: &[f64], c: f64) -> QuadraticObjective {
    let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
    QuadraticObjective::from_rows(&rows, b.to_vec(), c).expect("builtin quadratic is valid")
}

pub fn builtin(name: &str) -> Result<ProblemSpec> {
    let spec = match name {
        // f(x, y) = x^2 + 2y^2 - 2x - 2xy + 3
        "ex1_scalar" => ProblemSpec {
            name: name.into(),
            objectives: vec![quad(&[&[1.0, -1.0], &[-1.0, 2.0]], &[-2.0, 0.0], 3.0)],
            intended_minimizers: vec![
                (vec![2.0, 1.0], 3.0),
                (vec![1.0, 0.0], 3.0),
                (vec![0.0, 0.0], 3.0),
            ],
            notes: "x^2 + 2y^2 - 2x - 2xy + 3; local minimizers (2,1), (1,0), (0,0)".into(),
        },
        // f1 = (x - 1)^2 + y^2, f2 = x^2 + (y - 2)^2
        "ex2_biobjective" => ProblemSpec {
            name: name.into(),
            objectives: vec![
                quad(&[&[1.0, 0.0], &[0.0, 1.0]], &[-2.0, 0.0], 1.0),
                quad(&[&[1.0, 0.0], &[0.0, 1.0]], &[0.0, -4.0], 4.0),
            ],
            intended_minimizers: vec![],
            notes: "f1 = (x-1)^2 + y^2, f2 = x^2 + (y-2)^2".into(),
        },
        // f1 = (x - 2)^2, f2 = (x + 1)^2 + 1
        "ex3_max" => ProblemSpec {
            name: name.into(),
            objectives: vec![quad(&[&[1.0]], &[-4.0], 4.0), quad(&[&[1.0]], &[2.0], 2.0)],
            intended_minimizers: vec![],
            notes: "f1 = (x-2)^2, f2 = (x+1)^2 + 1".into(),
        },
        other => {
            return Err(Error::UnknownProblem {
                name: other.into(),
                available: BUILTIN_NAMES.to_vec(),
            })
        }
    };
    Ok(spec)
}

/// `m` strictly convex quadratics on `R^n`, deterministic in `seed`.
///
/// Each `Q = R^T D R` with `R` orthogonal (QR of a uniform random matrix)
/// and `D` diagonal with entries uniform in `[1, condition_bound]`; `b` has
/// entries in `[-5, 5]` and `c` lies in `[-1, 1]`.
pub fn random_quadratic(seed: u64, n: usize, m: usize, condition_bound: f64) -> Result<ProblemSpec> {
    if n == 0 || m == 0 {
        return Err(Error::Empty("random problem dimensions"));
    }
    if !(condition_bound >= 1.0 && condition_bound.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "condition_bound must be >= 1, got {condition_bound}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut objectives = Vec::with_capacity(m);
    let mut spectra = Vec::with_capacity(m);
    for _ in 0..m {
        let (q, d) = random_spd(&mut rng, n, condition_bound);
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..=5.0)).collect();
        let c = rng.random_range(-1.0..=1.0);
        objectives.push(QuadraticObjective::symmetrized(q, b, c)?);
        spectra.push(d);
    }
    Ok(ProblemSpec {
        name: format!("random_{seed}_{n}x{m}"),
        objectives,
        intended_minimizers: vec![],
        notes: format!(
            "seed {seed}, n {n}, m {m}, condition bound {condition_bound}; spectra {spectra:?}"
        ),
    })
}

/// Returns `R^T D R` and the diagonal `D`.
pub(crate) fn random_spd(rng: &mut ChaCha8Rng, n: usize, condition_bound: f64) -> (DMatrix<f64>, Vec<f64>) {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let r = a.qr().q();
    let d: Vec<f64> = (0..n)
        .map(|_| {
            if condition_bound == 1.0 {
                1.0
            } else {
                rng.random_range(1.0..=condition_bound)
            }
        })
        .collect();
    let q = r.transpose() * DMatrix::from_diagonal(&DVector::from_vec(d.clone())) * r;
    (q, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{estimate_lipschitz, SmoothObjective};
    use crate::oracle::{enumerate_supports, verify_local_min, EntryStatus};

    #[test]
    fn builtin_matrices() {
        let p = builtin("ex1_scalar").unwrap();
        let f = &p.objectives[0];
        assert_eq!(f.q().as_slice(), &[1.0, -1.0, -1.0, 2.0]);
        assert_eq!(f.b(), &[-2.0, 0.0]);
        assert_eq!(f.c(), 3.0);

        let p = builtin("ex2_biobjective").unwrap();
        assert_eq!(p.objectives[0].b(), &[-2.0, 0.0]);
        assert_eq!(p.objectives[0].c(), 1.0);
        assert_eq!(p.objectives[1].b(), &[0.0, -4.0]);
        assert_eq!(p.objectives[1].c(), 4.0);

        let p = builtin("ex3_max").unwrap();
        assert_eq!(p.dim(), 1);
        assert_eq!(p.objectives[0].b(), &[-4.0]);
        assert_eq!(p.objectives[1].b(), &[2.0]);
        assert_eq!(p.objectives[1].c(), 2.0);
    }

    #[test]
    fn builtins_match_scalar_formulas() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let ex1 = builtin("ex1_scalar").unwrap();
        let ex2 = builtin("ex2_biobjective").unwrap();
        let ex3 = builtin("ex3_max").unwrap();
        for _ in 0..100 {
            let x: f64 = rng.random_range(-10.0..10.0);
            let y: f64 = rng.random_range(-10.0..10.0);
            let rel = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + b.abs());

            let f = x * x + 2.0 * y * y - 2.0 * x - 2.0 * x * y + 3.0;
            assert!(rel(ex1.objectives[0].value(&[x, y]), f));

            let f1 = (x - 1.0).powi(2) + y * y;
            let f2 = x * x + (y - 2.0).powi(2);
            assert!(rel(ex2.objectives[0].value(&[x, y]), f1));
            assert!(rel(ex2.objectives[1].value(&[x, y]), f2));

            let g1 = (x - 2.0).powi(2);
            let g2 = (x + 1.0).powi(2) + 1.0;
            assert!(rel(ex3.objectives[0].value(&[x]), g1));
            assert!(rel(ex3.objectives[1].value(&[x]), g2));
        }
    }

    #[test]
    fn intended_minimizers_verify() {
        let p = builtin("ex1_scalar").unwrap();
        for (x, total) in &p.intended_minimizers {
            assert!(verify_local_min(&p.objectives[0], x, 1e-9).unwrap());
            let l0 = x.iter().filter(|v| **v != 0.0).count() as f64;
            assert_eq!(p.objectives[0].value(x) + l0, *total);
        }
    }

    #[test]
    fn unknown_name_lists_builtins() {
        let err = builtin("nope").unwrap_err();
        let msg = err.to_string();
        for name in BUILTIN_NAMES {
            assert!(msg.contains(name));
        }
    }

    #[test]
    fn random_is_deterministic() {
        let a = random_quadratic(42, 5, 2, 10.0).unwrap();
        let b = random_quadratic(42, 5, 2, 10.0).unwrap();
        assert_eq!(a, b);
        let c = random_quadratic(43, 5, 2, 10.0).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn unit_condition_gives_identity() {
        let p = random_quadratic(3, 4, 1, 1.0).unwrap();
        let q = p.objectives[0].q();
        let diff = (q - DMatrix::identity(4, 4)).amax();
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn lipschitz_matches_spectrum() {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (q, d) = random_spd(&mut rng, 6, 10.0);
            let q = (&q + q.transpose()) * 0.5;
            let dmax = d.iter().copied().fold(0.0, f64::max);
            let l = estimate_lipschitz(&q).unwrap();
            assert!((l - 2.0 * dmax).abs() < 1e-8, "seed {seed}: {l} vs {}", 2.0 * dmax);
        }
    }

    #[test]
    fn random_problems_are_strictly_convex() {
        for seed in 0..10 {
            let p = random_quadratic(seed, 4, 1, 20.0).unwrap();
            let cat = enumerate_supports(&p.objectives[0]).unwrap();
            assert!(cat.entries.iter().all(|e| e.status == EntryStatus::Unique));
        }
    }
}
