//! Acceptance checks.
//!
//! Each check runs one end-to-end property of the library at a fixed
//! tolerance and reports pass/fail with a short detail line. They are driven
//! by the `acceptance` test target and by `ell0 selftest`.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::l0::{l0_norm, ZeroMode};
use crate::objective::{QuadraticObjective, SmoothObjective};
use crate::oracle::{enumerate_supports, pareto_grid_check, verify_against, verify_local_min};
use crate::problems::{builtin, random_quadratic};
use crate::scalarize::{scalarizer_from_weights, Halfspace, PolyhedralScalarizer, WeightVector};
use crate::solvers::{
    compare_traces, solve_gerstewitz, solve_l0_descent, solve_weight_sum, SolverConfig, SolverTrace,
    Termination, VectorObjective,
};
use crate::vecops::{dist2, dist_inf, dot};

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] {:>2}. {} -- {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail
        )
    }
}

type Check = fn() -> Result<(bool, String)>;

pub const CHECKS: [(u32, &str, Check); 10] = [
    (1, "three-minimizer reproduction", three_minimizers),
    (2, "tolerance-mode hyperplane entry", tolerance_mode_entry),
    (3, "oracle agreement", oracle_agreement),
    (4, "descent inequality on random quadratics", descent_inequality),
    (5, "rate bound after support stabilization", rate_bound),
    (6, "weight-sum / Gerstewitz equivalence", weight_gerstewitz_equivalence),
    (7, "max-scalarizer correctness", max_scalarizer),
    (8, "Gerstewitz property suite", gerstewitz_properties),
    (9, "subgradient rate bound", subgradient_rate),
    (10, "Pareto falsifier", pareto_falsifier),
];

pub fn run(id: u32) -> Option<Outcome> {
    CHECKS.iter().find(|c| c.0 == id).map(|&(id, name, check)| {
        let (passed, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        Outcome {
            id,
            name,
            passed,
            detail,
        }
    })
}

pub fn run_all() -> Vec<Outcome> {
    CHECKS.iter().filter_map(|c| run(c.0)).collect()
}

fn ex1() -> QuadraticObjective {
    builtin("ex1_scalar").expect("builtin").objectives.remove(0)
}

fn ex_vector(name: &str) -> VectorObjective {
    VectorObjective::from_quadratics(builtin(name).expect("builtin").objectives).expect("valid")
}

/// `(start, expected limit, trace)` for the three reference starts.
type Ex1Run = ([f64; 2], [f64; 2], SolverTrace);

fn ex1_runs() -> Result<Vec<Ex1Run>> {
    let cfg = SolverConfig::new(0.1).with_eps(1e-6).with_max_iter(10_000);
    let f = ex1();
    [([3.0, 0.0], [1.0, 0.0]), ([0.0, 2.0], [0.0, 0.0]), ([-3.0, 2.0], [2.0, 1.0])]
        .into_iter()
        .map(|(x0, target)| Ok((x0, target, solve_l0_descent(&f, &x0, &cfg)?)))
        .collect()
}

fn three_minimizers() -> Result<(bool, String)> {
    let mut ok = true;
    let mut detail = Vec::new();
    for (x0, target, trace) in ex1_runs()? {
        let err = dist_inf(&trace.best_point, &target);
        let pass = trace.termination == Termination::Converged && err <= 1e-4 && trace.iterations() <= 10_000;
        ok &= pass;
        detail.push(format!("{x0:?}->{target:?} err {err:.1e} in {} it", trace.iterations()));
    }
    Ok((ok, detail.join("; ")))
}

fn tolerance_mode_entry() -> Result<(bool, String)> {
    let cfg = SolverConfig::new(0.1).with_eps(1e-6).with_tolerance(1e-6);
    let trace = solve_l0_descent(&ex1(), &[-3.0, 2.0], &cfg)?;
    let Some(first) = trace.rows.iter().position(|r| r.x[1] == 0.0) else {
        return Ok((false, "no iterate with y = 0".into()));
    };
    let stays = trace.rows[first..].iter().all(|r| r.x[1] == 0.0);
    Ok((
        stays,
        format!(
            "y = 0 from iteration {first} of {}, terminal {:?}",
            trace.iterations(),
            trace.best_point
        ),
    ))
}

fn oracle_agreement() -> Result<(bool, String)> {
    let f = ex1();
    let catalog = enumerate_supports(&f)?;
    let mut minimizers: Vec<(Vec<f64>, f64)> = catalog
        .local_minimizers()
        .map(|e| (e.minimizer.clone(), e.total))
        .collect();
    minimizers.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let expected = [[0.0, 0.0], [1.0, 0.0], [2.0, 1.0]];
    let set_ok = minimizers.len() == 3
        && minimizers
            .iter()
            .zip(expected)
            .all(|((x, total), e)| dist_inf(x, &e) < 1e-12 && (total - 3.0).abs() < 1e-12);

    let mut terminals = ex1_runs()?.into_iter().map(|r| r.2.best_point).collect::<Vec<_>>();
    let cfg = SolverConfig::new(0.1).with_eps(1e-6).with_tolerance(1e-6);
    terminals.push(solve_l0_descent(&f, &[-3.0, 2.0], &cfg)?.best_point);
    let verified = terminals.iter().all(|x| verify_against(&catalog, x, 1e-4));
    Ok((
        set_ok && verified,
        format!("local minimizers {minimizers:?}; {} terminal points verified: {verified}", terminals.len()),
    ))
}

/// Random suite shared by the descent and rate checks: `(seed, n, x0)` with
/// some starting coordinates set to zero so that restricted subspaces are
/// exercised.
fn random_suite() -> Vec<(u64, usize, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..50u64)
        .map(|i| {
            let n = 1 + (i as usize % 8);
            let x0 = (0..n)
                .map(|_| {
                    if rng.random_bool(0.3) {
                        0.0
                    } else {
                        rng.random_range(-5.0..5.0)
                    }
                })
                .collect();
            (1000 + i, n, x0)
        })
        .collect()
}

struct SuiteRun {
    single: QuadraticObjective,
    single_trace: SolverTrace,
    weighted: QuadraticObjective,
    weighted_trace: SolverTrace,
    step_single: f64,
    step_weighted: f64,
}

fn run_suite() -> Result<Vec<SuiteRun>> {
    let mut out = Vec::new();
    for (seed, n, x0) in random_suite() {
        let problem = random_quadratic(seed, n, 2, 10.0)?;
        let single = problem.objectives[0].clone();
        let step_single = 0.9 / single.lipschitz_grad();
        let cfg = SolverConfig::new(step_single).with_eps(1e-6).with_max_iter(100_000);
        let single_trace = solve_l0_descent(&single, &x0, &cfg)?;

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w0: f64 = rng.random_range(0.05..0.95);
        let weights = WeightVector::new(vec![w0, 1.0 - w0])?;
        let objectives = VectorObjective::from_quadratics(problem.objectives.clone())?;
        let step_weighted = 0.9 / objectives.lipschitz_max();
        let cfg = SolverConfig::new(step_weighted).with_eps(1e-6).with_max_iter(100_000);
        let weighted_trace = solve_weight_sum(&objectives, &weights, &x0, &cfg)?;
        let weighted = QuadraticObjective::weighted_sum(&problem.objectives, weights.as_slice())?;
        out.push(SuiteRun {
            single,
            single_trace,
            weighted,
            weighted_trace,
            step_single,
            step_weighted,
        });
    }
    Ok(out)
}

/// Worst violation of `f(x_{k+1}) <= f(x_k) - t/2 ||P_k grad f(x_k)||^2` and
/// of `total_{k+1} <= total_k` along a trace.
fn descent_violations(f: &dyn SmoothObjective, trace: &SolverTrace, t: f64) -> (f64, f64) {
    let mut worst_sufficient = f64::NEG_INFINITY;
    let mut worst_total = f64::NEG_INFINITY;
    for pair in trace.rows.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let pg = a.support.project(&f.gradient(&a.x)).expect("dims");
        let pg2 = dot(&pg, &pg);
        worst_sufficient = worst_sufficient.max(f.value(&b.x) - (f.value(&a.x) - 0.5 * t * pg2));
        worst_total = worst_total.max(b.total - a.total);
    }
    (worst_sufficient, worst_total)
}

fn descent_inequality() -> Result<(bool, String)> {
    let runs = run_suite()?;
    let mut worst = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut steps = 0;
    for r in &runs {
        for (f, trace, t) in [
            (&r.single, &r.single_trace, r.step_single),
            (&r.weighted, &r.weighted_trace, r.step_weighted),
        ] {
            let (a, b) = descent_violations(f, trace, t);
            worst = (worst.0.max(a), worst.1.max(b));
            steps += trace.iterations();
        }
    }
    let ok = worst.0 <= 1e-9 && worst.1 <= 0.0;
    Ok((
        ok,
        format!(
            "{} traces, {steps} steps; worst sufficient-decrease excess {:.2e}, worst total increase {:.2e}",
            2 * runs.len(),
            worst.0,
            worst.1
        ),
    ))
}

/// Worst value of `F(x_{k+s}) - F(xbar) - ||x_k - xbar||^2 / (2 s t)` over
/// `s >= 1`, with `k` the first iteration from which the support no longer
/// changes and `xbar` the exact minimizer of `f` on that support.
pub fn rate_excess(f: &QuadraticObjective, trace: &SolverTrace, t: f64) -> Result<f64> {
    let rows = &trace.rows;
    let final_support = &trace.last().support;
    let k = rows
        .iter()
        .rposition(|r| &r.support != final_support)
        .map_or(0, |i| i + 1);
    let catalog = enumerate_supports(f)?;
    let entry = catalog
        .entries
        .iter()
        .find(|e| &e.support == final_support)
        .expect("catalog covers every support");
    let xbar_total = entry.total;
    let d2 = dist2(&rows[k].x, &entry.minimizer).powi(2);
    let mut worst = f64::NEG_INFINITY;
    for s in 1..rows.len() - k {
        let gap = rows[k + s].total - xbar_total;
        worst = worst.max(gap - d2 / (2.0 * s as f64 * t));
    }
    Ok(worst)
}

fn rate_bound() -> Result<(bool, String)> {
    let runs = run_suite()?;
    let mut worst = f64::NEG_INFINITY;
    for r in &runs {
        worst = worst.max(rate_excess(&r.single, &r.single_trace, r.step_single)?);
        worst = worst.max(rate_excess(&r.weighted, &r.weighted_trace, r.step_weighted)?);
    }
    Ok((
        worst <= 1e-7,
        format!("{} traces; worst excess over the bound {worst:.2e}", 2 * runs.len()),
    ))
}

/// Shared configuration for the Example-2 comparison runs.
pub fn ex2_comparison_config() -> SolverConfig {
    SolverConfig::new(0.02).with_eps(1e-9).with_max_iter(10_000)
}

pub const EX2_START: [f64; 2] = [3.0, 3.0];

fn ex2_comparison() -> Result<(SolverTrace, SolverTrace)> {
    let objectives = ex_vector("ex2_biobjective");
    let w = WeightVector::new(vec![0.5, 0.5])?;
    let s = PolyhedralScalarizer::with_unit_direction(vec![Halfspace::new(vec![1.0, 1.0], 0.0)])?;
    let cfg = ex2_comparison_config();
    let a = solve_weight_sum(&objectives, &w, &EX2_START, &cfg)?;
    let b = solve_gerstewitz(&objectives, &s, &EX2_START, &cfg)?;
    Ok((a, b))
}

fn weight_gerstewitz_equivalence() -> Result<(bool, String)> {
    let (a, b) = ex2_comparison()?;
    let cmp = compare_traces(&a, &b);
    let worst = cmp.max_coord_diff.iter().copied().fold(0.0, f64::max);
    Ok((
        cmp.equivalent && cmp.rows() >= 100,
        format!(
            "{} common iterates, max coordinate difference {worst:.2e}, {}",
            cmp.rows(),
            if cmp.equivalent { "EQUIVALENT" } else { "NOT EQUIVALENT" }
        ),
    ))
}

fn max_scalarizer() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut exact = true;
    for i in 0..1000 {
        let m = 2 + i % 4;
        let s = PolyhedralScalarizer::max_scalarizer(m);
        let y: Vec<f64> = (0..m).map(|_| rng.random_range(-100.0..100.0)).collect();
        let max = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        exact &= s.eval(&y)? == max;
    }

    // Independent grid minimization of max{f1, f2}.
    let p = builtin("ex3_max")?;
    let (f1, f2) = (&p.objectives[0], &p.objectives[1]);
    let grid_min = (0..=500_000)
        .map(|i| -2.0 + i as f64 * 1e-5)
        .map(|x| (x, f1.value(&[x]).max(f2.value(&[x]))))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap()
        .0;

    let objectives = ex_vector("ex3_max");
    let s = PolyhedralScalarizer::max_scalarizer(2);
    let cfg = SolverConfig::new(1e-4).with_eps(1e-9).with_max_iter(100_000);
    let trace = solve_gerstewitz(&objectives, &s, &[3.0], &cfg)?;
    let x = trace.best_point[0];
    let ok = exact && (grid_min - 1.0 / 3.0).abs() <= 1e-5 && (x - 1.0 / 3.0).abs() <= 1e-3;
    Ok((
        ok,
        format!(
            "orthant max exact on 1000 points: {exact}; grid minimizer {grid_min:.6}; best point {x:.6} after {} it",
            trace.iterations()
        ),
    ))
}

/// Random scalarizer number `i`: even `i` have nonnegative normals, and
/// `i / 2` even gives a cone (all offsets zero).
fn random_scalarizer(rng: &mut ChaCha8Rng, i: usize) -> Result<PolyhedralScalarizer> {
    let pareto_safe = i.is_multiple_of(2);
    let conic = (i / 2).is_multiple_of(2);
    let m = 2 + i % 3;
    let p = 1 + rng.random_range(0..4usize);
    let k0: Vec<f64> = if i.is_multiple_of(3) {
        vec![1.0; m]
    } else {
        (0..m).map(|_| rng.random_range(0.5..2.0)).collect()
    };
    let mut halfspaces = Vec::with_capacity(p);
    for _ in 0..p {
        let mut a: Vec<f64> = if pareto_safe {
            (0..m).map(|_| rng.random_range(0.0..1.0)).collect()
        } else {
            (0..m).map(|_| rng.random_range(-1.0..1.0)).collect()
        };
        // Push <a, k0> above a positive margin.
        let ak = dot(&a, &k0);
        if ak < 0.1 {
            let shift = (0.1 - ak) / dot(&k0, &k0) + 0.05;
            for (ai, ki) in a.iter_mut().zip(&k0) {
                *ai += shift * ki;
            }
        }
        let b = if conic { 0.0 } else { rng.random_range(-3.0..3.0) };
        halfspaces.push(Halfspace::new(a, b));
    }
    PolyhedralScalarizer::new(halfspaces, k0)
}

#[derive(Default)]
struct PropertyTally {
    translation: (usize, usize),
    sublevel: (usize, usize),
    monotone: (usize, usize),
    convex: (usize, usize),
    homogeneous: (usize, usize),
    lipschitz: (usize, usize),
    subgradient: (usize, usize),
}

fn tally(slot: &mut (usize, usize), ok: bool) {
    slot.0 += 1;
    if !ok {
        slot.1 += 1;
    }
}

fn gerstewitz_properties() -> Result<(bool, String)> {
    const SAMPLES: usize = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut t = PropertyTally::default();
    let (mut n_safe, mut n_conic) = (0, 0);
    for i in 0..10 {
        let s = random_scalarizer(&mut rng, i)?;
        let m = s.dim();
        let k0 = s.direction().to_vec();
        let lip = s.lipschitz_bound();
        n_safe += s.is_pareto_safe() as usize;
        n_conic += s.is_conic() as usize;
        let mut draw = |r: f64| -> Vec<f64> { (0..m).map(|_| rng.random_range(-r..r)).collect() };
        for _ in 0..SAMPLES {
            let y = draw(10.0);
            let z = draw(10.0);
            let phi_y = s.eval(&y)?;
            let phi_z = s.eval(&z)?;

            let lambda = draw(10.0)[0];
            let shifted: Vec<f64> = y.iter().zip(&k0).map(|(a, k)| a + lambda * k).collect();
            tally(&mut t.translation, (s.eval(&shifted)? - phi_y - lambda).abs() < 1e-9);

            let level = phi_y + draw(1.0)[0];
            if (phi_y - level).abs() >= 1e-9 {
                let moved: Vec<f64> = y.iter().zip(&k0).map(|(a, k)| a - level * k).collect();
                let inside = s.halfspaces().iter().all(|h| h.contains(&moved));
                tally(&mut t.sublevel, (phi_y <= level) == inside);
            }

            if s.is_pareto_safe() {
                let bigger: Vec<f64> = y.iter().map(|a| a + draw(5.0)[0].abs()).collect();
                tally(&mut t.monotone, phi_y <= s.eval(&bigger)? + 1e-12);
            }

            let mu = (draw(1.0)[0] + 1.0) / 2.0;
            let mix: Vec<f64> = y.iter().zip(&z).map(|(a, b)| mu * a + (1.0 - mu) * b).collect();
            tally(&mut t.convex, s.eval(&mix)? <= mu * phi_y + (1.0 - mu) * phi_z + 1e-9);

            if s.is_conic() {
                let alpha = draw(5.0)[0].abs() + 1e-3;
                let scaled: Vec<f64> = y.iter().map(|a| alpha * a).collect();
                let lhs = s.eval(&scaled)?;
                tally(&mut t.homogeneous, (lhs - alpha * phi_y).abs() <= 1e-9 * (alpha * phi_y).abs().max(1.0));
            }

            let gap = (phi_y - phi_z).abs();
            tally(&mut t.lipschitz, gap <= lip * dist2(&y, &z) * (1.0 + 1e-12) + 1e-12);

            let g = s.subgradient(&y)?;
            let diff: Vec<f64> = z.iter().zip(&y).map(|(a, b)| a - b).collect();
            let normalized = (dot(&g, &k0) - 1.0).abs() < 1e-12;
            tally(&mut t.subgradient, normalized && phi_z >= phi_y + dot(&g, &diff) - 1e-9);
        }
    }
    let parts = [
        ("translation", t.translation),
        ("sublevel", t.sublevel),
        ("monotone", t.monotone),
        ("convex", t.convex),
        ("homogeneous", t.homogeneous),
        ("lipschitz", t.lipschitz),
        ("subgradient", t.subgradient),
    ];
    let enough = n_safe >= 5 && n_conic >= 5;
    let ok = enough && parts.iter().all(|(_, (n, fails))| *fails == 0 && *n >= SAMPLES);
    let detail = parts
        .iter()
        .map(|(name, (n, f))| format!("{name} {}/{n}", n - f))
        .collect::<Vec<_>>()
        .join(", ");
    Ok((ok, format!("10 scalarizers ({n_safe} pareto-safe, {n_conic} conic): {detail}")))
}

/// Worst excess of the running best scalarized value over
/// `(dist(x_{s+1}, xbar)^2 + M^2 t^2 k) / (2 t k)`, `k >= 1`, where `s` is the
/// iteration from which the support is constant. Covers every `k`, including
/// those past the end of the trace.
pub fn subgradient_rate_excess(
    objectives: &VectorObjective,
    scalarizer: &PolyhedralScalarizer,
    trace: &SolverTrace,
    t: f64,
    xbar: &[f64],
) -> Result<f64> {
    let rows = &trace.rows;
    let n = objectives.dim();
    let mut lower = vec![f64::INFINITY; n];
    let mut upper = vec![f64::NEG_INFINITY; n];
    for r in rows {
        for i in 0..n {
            lower[i] = lower[i].min(r.x[i].min(xbar[i]));
            upper[i] = upper[i].max(r.x[i].max(xbar[i]));
        }
    }
    let m_bound = scalarizer.lipschitz_bound() * objectives.jacobian_bound(&lower, &upper)?;
    let phi_bar = scalarizer.eval(&objectives.values(xbar))?
        + l0_norm(xbar, ZeroMode::Exact) as f64;

    let final_support = &trace.last().support;
    let s = rows
        .iter()
        .rposition(|r| &r.support != final_support)
        .map_or(0, |i| i + 1);
    let d2 = dist2(&rows[(s + 1).min(rows.len() - 1)].x, xbar).powi(2);
    let mut best = f64::INFINITY;
    let mut worst = f64::NEG_INFINITY;
    for k in 1..rows.len() - s {
        best = best.min(rows[s + k].total);
        let kf = k as f64;
        let bound = (d2 + m_bound * m_bound * t * t * kf) / (2.0 * t * kf);
        worst = worst.max(best - phi_bar - bound);
    }
    // The running best cannot increase past the end of the trace and the
    // bound decreases to M^2 t / 2, so this caps the excess for every later k.
    worst = worst.max(best - phi_bar - m_bound * m_bound * t / 2.0);
    Ok(worst)
}

fn subgradient_rate() -> Result<(bool, String)> {
    let objectives = ex_vector("ex2_biobjective");
    let s = scalarizer_from_weights(&WeightVector::new(vec![0.5, 0.5])?)?;
    let cfg = SolverConfig::new(0.02).with_eps(f64::MIN_POSITIVE).with_max_iter(10_000);
    let trace = solve_gerstewitz(&objectives, &s, &EX2_START, &cfg)?;
    let worst = subgradient_rate_excess(&objectives, &s, &trace, cfg.step, &[0.5, 1.0])?;
    Ok((
        worst <= 1e-6,
        format!("{} iterations; worst excess over the bound {worst:.2e}", trace.iterations()),
    ))
}

fn pareto_falsifier() -> Result<(bool, String)> {
    let objectives = ex_vector("ex2_biobjective");
    let (a, b) = ex2_comparison()?;
    let pa = pareto_grid_check(&objectives, &a.best_point, 0.2, 0.01)?;
    let pb = pareto_grid_check(&objectives, &b.best_point, 0.2, 0.01)?;
    let dominated = pareto_grid_check(&objectives, &[10.0, 10.0], 0.2, 0.01)?;
    Ok((
        pa && pb && !dominated,
        format!(
            "weight-sum terminal {:?}: {pa}; Gerstewitz terminal {:?}: {pb}; (10,10) rejected: {}",
            a.best_point, b.best_point, !dominated
        ),
    ))
}

/// Every Converged terminal point of projected descent on a quadratic passes
/// the catalog check; used by the oracle property tests.
pub fn descent_endpoint_verifies(f: &QuadraticObjective, x0: &[f64]) -> Result<bool> {
    let cfg = SolverConfig::new(0.9 / f.lipschitz_grad()).with_eps(1e-6).with_max_iter(100_000);
    let trace = solve_l0_descent(f, x0, &cfg)?;
    if trace.termination != Termination::Converged {
        return Ok(false);
    }
    verify_local_min(f, &trace.best_point, 1e-4)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vecops::norm2;

    #[test]
    fn check_ids_are_unique_and_ordered() {
        let ids: Vec<u32> = CHECKS.iter().map(|c| c.0).collect();
        assert_eq!(ids, (1..=10).collect::<Vec<_>>());
        assert!(run(11).is_none());
    }

    #[test]
    fn norm_helper_sanity() {
        assert_eq!(norm2(&[3.0, 4.0]), 5.0);
    }
}
