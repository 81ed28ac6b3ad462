use ell0_core::objective::SmoothObjective;
use ell0_core::oracle::{enumerate_supports, verify_local_min};
use ell0_core::problems::random_quadratic;
use ell0_core::selftest::descent_endpoint_verifies;
use ell0_core::solvers::{solve_l0_descent, solve_l0_multistart};
use ell0_core::{QuadraticObjective, SolverConfig, ZeroMode};
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_point(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-r..r)).collect()
}

fn quadratic(seed: u64, n: usize) -> QuadraticObjective {
    random_quadratic(seed, n, 1, 25.0).unwrap().objectives.remove(0)
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for seed in 0..100 {
        let n = 1 + seed as usize % 7;
        let f = quadratic(seed, n);
        let x = random_point(&mut rng, n, 3.0);
        let g = f.gradient(&x);
        let h = 1e-5;
        for i in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (f.value(&xp) - f.value(&xm)) / (2.0 * h);
            assert!((fd - g[i]).abs() <= 1e-5 * (1.0 + g[i].abs()), "seed {seed} coord {i}: {fd} vs {}", g[i]);
        }
    }
}

#[test]
fn convexity_and_lipschitz_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for pair in 0..1000u64 {
        let n = 1 + pair as usize % 6;
        let f = quadratic(pair % 40, n);
        let x = random_point(&mut rng, n, 5.0);
        let y = random_point(&mut rng, n, 5.0);
        let gx = f.gradient(&x);
        let gy = f.gradient(&y);
        let linear: f64 = gx.iter().zip(&y).zip(&x).map(|((g, a), b)| g * (a - b)).sum();
        assert!(f.value(&y) >= f.value(&x) + linear - 1e-9);

        let dg = gx.iter().zip(&gy).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let dx = x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(dg <= f.lipschitz_grad() * dx * (1.0 + 1e-9), "pair {pair}");
    }
}

#[test]
fn catalog_covers_every_support() {
    for n in 1..=6 {
        let cat = enumerate_supports(&quadratic(n as u64, n)).unwrap();
        assert_eq!(cat.entries.len(), 1 << n);
        for (bits, e) in cat.entries.iter().enumerate() {
            assert_eq!(e.support.to_bitstring().len(), n);
            assert_eq!(e.support.count(), (bits as u64).count_ones() as usize);
        }
    }
}

#[test]
fn catalog_lower_bounds_solver_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for seed in 0..30 {
        let n = 1 + seed as usize % 5;
        let f = quadratic(seed, n);
        let best = enumerate_supports(&f).unwrap().global_best_value();
        let cfg = SolverConfig::new(0.9 / f.lipschitz_grad()).with_tolerance(1e-8).with_max_iter(50_000);
        let x0 = random_point(&mut rng, n, 4.0);
        for trace in [solve_l0_descent(&f, &x0, &cfg).unwrap(), solve_l0_multistart(&f, &x0, &cfg).unwrap()] {
            assert!(trace.best_value >= best - 1e-6, "seed {seed}: {} < {best}", trace.best_value);
        }
    }
}

#[test]
fn descent_endpoints_are_catalog_minimizers() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for seed in 0..40 {
        let n = 1 + seed as usize % 6;
        let f = quadratic(seed, n);
        let mut x0 = random_point(&mut rng, n, 4.0);
        for v in x0.iter_mut().step_by(2) {
            if rng.random_bool(0.4) {
                *v = 0.0;
            }
        }
        assert!(descent_endpoint_verifies(&f, &x0).unwrap(), "seed {seed}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn descent_never_grows_support(seed in 0u64..500, x0 in prop::collection::vec(-5.0f64..5.0, 1..6)) {
        let f = quadratic(seed, x0.len());
        let cfg = SolverConfig::new(0.9 / f.lipschitz_grad()).with_max_iter(2000);
        let trace = solve_l0_descent(&f, &x0, &cfg).unwrap();
        let first = &trace.rows[0].support;
        for r in &trace.rows {
            prop_assert!(r.support.is_subset_of(first));
        }
    }

    #[test]
    fn tolerance_mode_endpoints_verify(seed in 0u64..500, x0 in prop::collection::vec(-5.0f64..5.0, 1..5)) {
        let f = quadratic(seed, x0.len());
        let cfg = SolverConfig::new(0.9 / f.lipschitz_grad()).with_tolerance(1e-6).with_max_iter(50_000);
        let trace = solve_l0_descent(&f, &x0, &cfg).unwrap();
        prop_assert_eq!(trace.rows[0].x.iter().filter(|v| **v != 0.0).count(),
            ell0_core::l0::l0_norm(&x0, ZeroMode::Tol(1e-6)));
        prop_assert!(verify_local_min(&f, &trace.best_point, 1e-4).unwrap());
    }
}
