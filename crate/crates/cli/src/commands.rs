//! Subcommand implementations. Each returns the process exit code or an
//! error (exit code 1).

use std::path::{Path, PathBuf};

use ell0_core::objective::QuadraticObjective;
use ell0_core::oracle::{
    enumerate_supports, enumerate_supports_capped, pareto_grid_check, verify_against,
    DEFAULT_ENUMERATION_DIM, MAX_ENUMERATION_DIM, MAX_GRID_DIM,
};
use ell0_core::problems::ProblemSpec;
use ell0_core::solvers::{
    solve_gerstewitz, solve_l0_descent, solve_l0_multistart, solve_weight_sum,
};
use ell0_core::{compare_traces, selftest, Error, SolverTrace, Termination, VectorObjective};
use serde_json::{json, Value};

use crate::config::{self, Algorithm, Prepared, RunConfig};
use crate::error::CliError;
use crate::{svg, tables};

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_MAX_ITER: u8 = 2;
pub const EXIT_ESCAPES: u8 = 3;

/// Local-minimality tolerance for oracle verdicts in summaries.
const VERDICT_TOL: f64 = 1e-4;
const PARETO_RADIUS: f64 = 0.2;
const PARETO_STEP: f64 = 0.01;

pub fn exit_code(t: Termination) -> u8 {
    match t {
        Termination::Converged => EXIT_OK,
        Termination::MaxIter => EXIT_MAX_ITER,
        Termination::EscapesExhausted => EXIT_ESCAPES,
        Termination::Aborted => EXIT_ERROR,
    }
}

/// Where relative output paths land.
pub struct OutDir(pub PathBuf);

impl OutDir {
    fn resolve(&self, configured: Option<&PathBuf>, default: &str) -> PathBuf {
        match configured {
            Some(p) if p.is_absolute() => p.clone(),
            Some(p) => self.0.join(p),
            None => self.0.join(default),
        }
    }
}

fn ensure_parent(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.to_owned(), e))
        }
        _ => Ok(()),
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    ensure_parent(path)?;
    std::fs::write(path, text).map_err(|e| CliError::Io(path.to_owned(), e))
}

fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("json values serialize");
    text.push('\n');
    write_text(path, &text)
}

fn run_one(problem: &ProblemSpec, p: &Prepared, x0: &[f64]) -> Result<SolverTrace, Error> {
    match p.algorithm {
        Algorithm::Descent => solve_l0_descent(&problem.objectives[0], x0, &p.solver),
        Algorithm::Multistart => solve_l0_multistart(&problem.objectives[0], x0, &p.solver),
        Algorithm::WeightSum => {
            let objs = VectorObjective::from_quadratics(problem.objectives.clone())?;
            solve_weight_sum(&objs, p.weights.as_ref().expect("validated"), x0, &p.solver)
        }
        Algorithm::Gerstewitz => {
            let objs = VectorObjective::from_quadratics(problem.objectives.clone())?;
            solve_gerstewitz(&objs, p.scalarizer.as_ref().expect("validated"), x0, &p.solver)
        }
    }
}

/// The quadratic whose `f + ||.||_0` the algorithm minimizes, if any.
fn minimized_quadratic(problem: &ProblemSpec, p: &Prepared) -> Option<QuadraticObjective> {
    match p.algorithm {
        Algorithm::Descent | Algorithm::Multistart => Some(problem.objectives[0].clone()),
        Algorithm::WeightSum => QuadraticObjective::weighted_sum(
            &problem.objectives,
            p.weights.as_ref().expect("validated").as_slice(),
        )
        .ok(),
        Algorithm::Gerstewitz => None,
    }
}

fn oracle_verdict(problem: &ProblemSpec, p: &Prepared, trace: &SolverTrace) -> Result<Value, CliError> {
    let n = problem.dim();
    let mut verdict = serde_json::Map::new();
    if let Some(q) = minimized_quadratic(problem, p).filter(|_| n <= DEFAULT_ENUMERATION_DIM) {
        let catalog = enumerate_supports(&q)?;
        let global = catalog.global_best_value();
        verdict.insert("is_local_min".into(), json!(verify_against(&catalog, &trace.best_point, VERDICT_TOL)));
        verdict.insert("global_best_value".into(), json!(global));
        verdict.insert("attains_global".into(), json!(trace.best_value <= global + VERDICT_TOL));
    }
    if problem.objectives.len() > 1 && n <= MAX_GRID_DIM {
        let objs = VectorObjective::from_quadratics(problem.objectives.clone())?;
        let pareto = pareto_grid_check(&objs, &trace.best_point, PARETO_RADIUS, PARETO_STEP)?;
        verdict.insert("pareto_grid".into(), json!(pareto));
    }
    Ok(if verdict.is_empty() { Value::Null } else { Value::Object(verdict) })
}

fn trace_summary(trace: &SolverTrace) -> Value {
    json!({
        "termination": trace.termination.as_str(),
        "iterations": trace.iterations(),
        "best_point": trace.best_point,
        "best_value": trace.best_value,
        "escapes": trace.escapes,
        "candidates": trace.candidates.len(),
        "warnings": trace.warnings,
    })
}

fn split_numeric(result: Result<SolverTrace, Error>) -> Result<(SolverTrace, Option<Error>), CliError> {
    match result {
        Ok(t) => Ok((t, None)),
        Err(Error::Numeric { iteration, message, trace }) => {
            let partial = (*trace).clone();
            Ok((partial, Some(Error::Numeric { iteration, message, trace })))
        }
        Err(e) => Err(e.into()),
    }
}

pub fn solve(config_path: &Path, out: &OutDir) -> Result<u8, CliError> {
    let cfg: RunConfig = config::load(config_path)?;
    if cfg.runs.is_some() {
        return Err(CliError::field("runs", "only used by `compare`"));
    }
    let algorithm = cfg
        .algorithm
        .ok_or_else(|| CliError::field("algorithm", "required"))?;
    let problem = cfg.problem.build()?;
    let x0 = config::start_point(&cfg.x0, problem.dim())?;
    let solver = cfg.solver.as_ref().ok_or_else(|| CliError::field("solver", "required"))?;
    let prepared = config::prepare("", algorithm, &cfg.weights, &cfg.scalarizer, solver, problem.objectives.len())?;

    let (trace, failure) = split_numeric(run_one(&problem, &prepared, &x0))?;

    let trace_path = out.resolve(cfg.outputs.trace_csv.as_ref(), "trace.csv");
    ensure_parent(&trace_path)?;
    tables::write_trace(&trace_path, &trace)?;

    let mut summary = json!({
        "command": "solve",
        "problem": problem.name,
        "algorithm": algorithm.as_str(),
        "n": problem.dim(),
        "m": problem.objectives.len(),
        "x0": x0,
        "step": prepared.solver.step,
    });
    let obj = summary.as_object_mut().expect("object");
    if let Value::Object(t) = trace_summary(&trace) {
        obj.extend(t);
    }
    let code = match &failure {
        Some(_) => EXIT_ERROR,
        None => exit_code(trace.termination),
    };
    obj.insert("exit_code".into(), json!(code));
    obj.insert("error".into(), json!(failure.as_ref().map(|e| e.to_string())));
    let verdict = match failure {
        None => oracle_verdict(&problem, &prepared, &trace)?,
        Some(_) => Value::Null,
    };
    obj.insert("oracle".into(), verdict);
    obj.insert("trace_csv".into(), json!(trace_path));

    if let Some(p) = cfg.outputs.plot_svg.as_ref() {
        let plot_path = out.resolve(Some(p), "plot.svg");
        let doc = svg::render(&trace.rows, problem.dim() > 2)?;
        write_text(&plot_path, &doc)?;
        obj.insert("plot_svg".into(), json!(plot_path));
    }

    let summary_path = out.resolve(cfg.outputs.summary_json.as_ref(), "summary.json");
    write_json(&summary_path, &summary)?;

    if let Some(e) = failure {
        return Err(e.into());
    }
    for w in &trace.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "{} after {} iterations; best value {} at {:?}",
        trace.termination,
        trace.iterations(),
        trace.best_value,
        trace.best_point
    );
    Ok(code)
}

pub fn compare(config_path: &Path, out: &OutDir) -> Result<u8, CliError> {
    let cfg: RunConfig = config::load(config_path)?;
    for (present, field) in [
        (cfg.algorithm.is_some(), "algorithm"),
        (cfg.weights.is_some(), "weights"),
        (cfg.scalarizer.is_some(), "scalarizer"),
    ] {
        if present {
            return Err(CliError::field(field, "`compare` takes algorithm settings inside `runs`"));
        }
    }
    let runs = cfg.runs.as_ref().ok_or_else(|| CliError::field("runs", "required"))?;
    if runs.len() != 2 {
        return Err(CliError::field("runs", format!("expected 2 algorithm blocks, got {}", runs.len())));
    }
    let problem = cfg.problem.build()?;
    let x0 = config::start_point(&cfg.x0, problem.dim())?;
    let mut prepared = Vec::with_capacity(2);
    for (i, run) in runs.iter().enumerate() {
        let prefix = format!("runs[{i}].");
        let solver = run.solver.as_ref().or(cfg.solver.as_ref()).ok_or_else(|| {
            CliError::field(format!("{prefix}solver"), "required here or at the top level")
        })?;
        prepared.push(config::prepare(
            &prefix,
            run.algorithm,
            &run.weights,
            &run.scalarizer,
            solver,
            problem.objectives.len(),
        )?);
    }

    let (ra, rb) = std::thread::scope(|s| {
        let a = s.spawn(|| run_one(&problem, &prepared[0], &x0));
        let b = s.spawn(|| run_one(&problem, &prepared[1], &x0));
        (a.join().expect("solver thread"), b.join().expect("solver thread"))
    });
    let (a, fail_a) = split_numeric(ra)?;
    let (b, fail_b) = split_numeric(rb)?;

    let cmp = compare_traces(&a, &b);
    let worst = cmp.max_coord_diff.iter().copied().fold(0.0, f64::max);
    let verdict = if cmp.equivalent { "EQUIVALENT" } else { "NOT_EQUIVALENT" };

    let csv_path = out.resolve(cfg.outputs.trace_csv.as_ref(), "compare.csv");
    ensure_parent(&csv_path)?;
    tables::write_comparison(&csv_path, &a, &b, &cmp)?;

    let failure = fail_a.or(fail_b);
    let run_summary = |p: &Prepared, t: &SolverTrace| {
        let mut v = trace_summary(t);
        v["algorithm"] = json!(p.algorithm.as_str());
        v
    };
    let summary = json!({
        "command": "compare",
        "problem": problem.name,
        "n": problem.dim(),
        "x0": x0,
        "verdict": verdict,
        "equivalent": cmp.equivalent,
        "compared_rows": cmp.rows(),
        "max_coord_diff": worst,
        "runs": [run_summary(&prepared[0], &a), run_summary(&prepared[1], &b)],
        "error": failure.as_ref().map(|e| e.to_string()),
        "trace_csv": csv_path,
    });
    let summary_path = out.resolve(cfg.outputs.summary_json.as_ref(), "compare_summary.json");
    write_json(&summary_path, &summary)?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    println!(
        "{verdict}: {} common iterates, max coordinate difference {worst:e}; best points {:?} and {:?}",
        cmp.rows(),
        a.best_point,
        b.best_point
    );
    Ok(EXIT_OK)
}

pub fn oracle(config_path: &Path, out: &OutDir, allow_large: bool) -> Result<u8, CliError> {
    let cfg: RunConfig = config::load(config_path)?;
    let problem = cfg.problem.build()?;
    if problem.objectives.len() != 1 {
        return Err(CliError::field(
            "problem",
            format!("the oracle needs a single quadratic objective, got {}", problem.objectives.len()),
        ));
    }
    let cap = if allow_large { MAX_ENUMERATION_DIM } else { DEFAULT_ENUMERATION_DIM };
    let catalog = enumerate_supports_capped(&problem.objectives[0], cap).map_err(|e| match e {
        Error::TooLarge { .. } if !allow_large => CliError::Usage(format!("{e}; pass --allow-large to go up to n = {MAX_ENUMERATION_DIM}")),
        other => other.into(),
    })?;

    let csv_path = out.resolve(cfg.outputs.catalog_csv.as_ref(), "catalog.csv");
    ensure_parent(&csv_path)?;
    tables::write_catalog(&csv_path, &catalog)?;

    let global = catalog.global_best_value();
    let best: Vec<Value> = catalog
        .global_best(1e-9)
        .iter()
        .map(|e| json!({"support": e.support.to_bitstring(), "point": e.minimizer, "total": e.total}))
        .collect();
    let summary = json!({
        "command": "oracle",
        "problem": problem.name,
        "n": problem.dim(),
        "rows": catalog.entries.len(),
        "local_minimizers": catalog.local_minimizers().count(),
        "global_best_value": global,
        "global_best": best,
        "catalog_csv": csv_path,
    });
    let summary_path = out.resolve(cfg.outputs.summary_json.as_ref(), "oracle_summary.json");
    write_json(&summary_path, &summary)?;
    println!(
        "{} supports, {} local minimizers, global best total {global} ({} point(s))",
        catalog.entries.len(),
        catalog.local_minimizers().count(),
        best.len()
    );
    Ok(EXIT_OK)
}

pub fn plot(trace_path: &Path, svg_path: Option<&PathBuf>, out: &OutDir, value_only: bool) -> Result<u8, CliError> {
    let rows = tables::read_trace(trace_path)?;
    let doc = svg::render(&rows, value_only)?;
    let path = out.resolve(svg_path, "plot.svg");
    write_text(&path, &doc)?;
    println!("wrote {}", path.display());
    Ok(EXIT_OK)
}

pub fn selftest() -> u8 {
    let outcomes = selftest::run_all();
    for o in &outcomes {
        println!("{o}");
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    println!("{passed}/{} passed", outcomes.len());
    if passed == outcomes.len() {
        EXIT_OK
    } else {
        EXIT_ERROR
    }
}
