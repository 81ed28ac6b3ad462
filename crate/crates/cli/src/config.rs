//! Run configuration files (JSON).

use std::fmt;
use std::path::{Path, PathBuf};

use ell0_core::objective::QuadraticObjective;
use ell0_core::problems::{self, ProblemSpec};
use ell0_core::scalarize::scalarizer_from_weights;
use ell0_core::{Halfspace, Point, PolyhedralScalarizer, SolverConfig, WeightVector, ZeroMode};
use serde::de::{self, MapAccess, Visitor};
use serde::{Deserialize, Deserializer};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Descent,
    Multistart,
    WeightSum,
    Gerstewitz,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Descent => "descent",
            Algorithm::Multistart => "multistart",
            Algorithm::WeightSum => "weight_sum",
            Algorithm::Gerstewitz => "gerstewitz",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveSpec {
    pub q: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSpec {
    pub seed: u64,
    pub n: usize,
    #[serde(default = "one")]
    pub m: usize,
    #[serde(default = "ten")]
    pub condition_bound: f64,
}

fn one() -> usize {
    1
}

fn ten() -> f64 {
    10.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemObject {
    objectives: Option<Vec<ObjectiveSpec>>,
    random: Option<RandomSpec>,
}

/// A builtin name, `{"objectives": [...]}` or `{"random": {...}}`.
#[derive(Debug, Clone)]
pub enum ProblemConfig {
    Builtin(String),
    Inline(Vec<ObjectiveSpec>),
    Random(RandomSpec),
}

impl<'de> Deserialize<'de> for ProblemConfig {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;

        impl<'de> Visitor<'de> for V {
            type Value = ProblemConfig;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a builtin problem name or an object with `objectives` or `random`")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
                Ok(ProblemConfig::Builtin(v.to_owned()))
            }

            fn visit_map<A: MapAccess<'de>>(self, map: A) -> Result<Self::Value, A::Error> {
                let obj = ProblemObject::deserialize(de::value::MapAccessDeserializer::new(map))?;
                match (obj.objectives, obj.random) {
                    (Some(o), None) => Ok(ProblemConfig::Inline(o)),
                    (None, Some(r)) => Ok(ProblemConfig::Random(r)),
                    _ => Err(de::Error::custom(
                        "problem object needs exactly one of `objectives` or `random`",
                    )),
                }
            }
        }

        d.deserialize_any(V)
    }
}

impl ProblemConfig {
    pub fn build(&self) -> Result<ProblemSpec, CliError> {
        let field = |e: ell0_core::Error| CliError::field("problem", e.to_string());
        match self {
            ProblemConfig::Builtin(name) => problems::builtin(name).map_err(field),
            ProblemConfig::Random(r) => {
                problems::random_quadratic(r.seed, r.n, r.m, r.condition_bound).map_err(field)
            }
            ProblemConfig::Inline(specs) => {
                if specs.is_empty() {
                    return Err(CliError::field("problem.objectives", "at least one objective is required"));
                }
                let mut objectives = Vec::with_capacity(specs.len());
                for (i, s) in specs.iter().enumerate() {
                    let q = QuadraticObjective::from_rows(&s.q, s.b.clone(), s.c)
                        .map_err(|e| CliError::field(format!("problem.objectives[{i}]"), e.to_string()))?;
                    objectives.push(q);
                }
                let n = objectives[0].b().len();
                if let Some(i) = objectives.iter().position(|o| o.b().len() != n) {
                    return Err(CliError::field(
                        format!("problem.objectives[{i}]"),
                        format!("dimension {} differs from objective 0 ({n})", objectives[i].b().len()),
                    ));
                }
                Ok(ProblemSpec {
                    name: "inline".into(),
                    objectives,
                    intended_minimizers: vec![],
                    notes: String::new(),
                })
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarizerConfig {
    /// Rows `[a_1, ..., a_m, b]` for the halfspaces `<a, y> <= b`.
    pub halfspaces: Vec<Vec<f64>>,
    pub k0: Vec<f64>,
}

impl ScalarizerConfig {
    pub fn build(&self, field: &str) -> Result<PolyhedralScalarizer, CliError> {
        let m = self.k0.len();
        let mut halfspaces = Vec::with_capacity(self.halfspaces.len());
        for (i, row) in self.halfspaces.iter().enumerate() {
            if row.len() != m + 1 {
                return Err(CliError::field(
                    format!("{field}.halfspaces[{i}]"),
                    format!("expected {} entries (normal of length {m} then offset), got {}", m + 1, row.len()),
                ));
            }
            halfspaces.push(Halfspace::new(row[..m].to_vec(), row[m]));
        }
        PolyhedralScalarizer::new(halfspaces, self.k0.clone()).map_err(|e| CliError::field(field, e.to_string()))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    pub step: f64,
    pub eps_stop: Option<f64>,
    pub max_iter: Option<usize>,
    pub zero_mode: Option<ZeroMode>,
    /// Defaults to `true` in tolerance mode.
    pub snap: Option<bool>,
    pub escape_limit: Option<usize>,
}

impl SolverBlock {
    pub fn build(&self, field: &str) -> Result<SolverConfig, CliError> {
        let mut cfg = SolverConfig::new(self.step);
        if let Some(eps) = self.eps_stop {
            cfg = cfg.with_eps(eps);
        }
        if let Some(k) = self.max_iter {
            cfg = cfg.with_max_iter(k);
        }
        if let Some(mode) = self.zero_mode {
            cfg.zero_mode = mode;
            cfg.snap = matches!(mode, ZeroMode::Tol(_));
        }
        if let Some(snap) = self.snap {
            cfg.snap = snap;
        }
        cfg.escape_limit = self.escape_limit;
        cfg.validate().map_err(|e| CliError::field(field, e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub trace_csv: Option<PathBuf>,
    pub summary_json: Option<PathBuf>,
    pub plot_svg: Option<PathBuf>,
    pub catalog_csv: Option<PathBuf>,
}

/// One algorithm block of a `compare` config.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunBlock {
    pub algorithm: Algorithm,
    pub weights: Option<Vec<f64>>,
    pub scalarizer: Option<ScalarizerConfig>,
    pub solver: Option<SolverBlock>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub algorithm: Option<Algorithm>,
    pub weights: Option<Vec<f64>>,
    pub scalarizer: Option<ScalarizerConfig>,
    pub x0: Option<Vec<f64>>,
    pub solver: Option<SolverBlock>,
    pub runs: Option<Vec<RunBlock>>,
    #[serde(default)]
    pub outputs: Outputs,
}

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_owned(), e))?;
    parse(&text).map_err(|e| match e {
        CliError::Config { field, message } => CliError::Config {
            field,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        CliError::Config {
            field,
            message: format!("line {}, column {}: {inner}", inner.line(), inner.column()),
        }
    })?;
    de.end().map_err(|e| CliError::field(".", e.to_string()))?;
    Ok(cfg)
}

/// Everything a single solver run needs, validated against the problem.
pub struct Prepared {
    pub algorithm: Algorithm,
    pub solver: SolverConfig,
    pub weights: Option<WeightVector>,
    pub scalarizer: Option<PolyhedralScalarizer>,
}

fn forbid<T>(value: &Option<T>, field: &str, algorithm: Algorithm) -> Result<(), CliError> {
    match value {
        Some(_) => Err(CliError::field(
            field,
            format!("not used by algorithm `{}`; remove it", algorithm.as_str()),
        )),
        None => Ok(()),
    }
}

fn require<'a, T>(value: &'a Option<T>, field: &str, algorithm: Algorithm) -> Result<&'a T, CliError> {
    value.as_ref().ok_or_else(|| {
        CliError::field(field, format!("required by algorithm `{}`", algorithm.as_str()))
    })
}

/// Checks that exactly the fields needed by `algorithm` are present and
/// consistent with the problem's `m` objectives.
pub fn prepare(
    prefix: &str,
    algorithm: Algorithm,
    weights: &Option<Vec<f64>>,
    scalarizer: &Option<ScalarizerConfig>,
    solver: &SolverBlock,
    m: usize,
) -> Result<Prepared, CliError> {
    let at = |f: &str| format!("{prefix}{f}");
    let solver_cfg = solver.build(&at("solver"))?;
    if algorithm != Algorithm::Multistart {
        forbid(&solver.escape_limit, &at("solver.escape_limit"), algorithm)?;
    }
    let mut prepared = Prepared {
        algorithm,
        solver: solver_cfg,
        weights: None,
        scalarizer: None,
    };
    match algorithm {
        Algorithm::Descent | Algorithm::Multistart => {
            forbid(weights, &at("weights"), algorithm)?;
            forbid(scalarizer, &at("scalarizer"), algorithm)?;
            if m != 1 {
                return Err(CliError::field(
                    "problem",
                    format!(
                        "algorithm `{}` needs a single objective, the problem has {m}; use weight_sum or gerstewitz",
                        algorithm.as_str()
                    ),
                ));
            }
        }
        Algorithm::WeightSum => {
            forbid(scalarizer, &at("scalarizer"), algorithm)?;
            let w = require(weights, &at("weights"), algorithm)?;
            if w.len() != m {
                return Err(CliError::field(
                    at("weights"),
                    format!("expected {m} weights (one per objective), got {}", w.len()),
                ));
            }
            let w = WeightVector::new(w.clone()).map_err(|e| CliError::field(at("weights"), e.to_string()))?;
            // Validates that the weights also define a Gerstewitz scalarizer.
            scalarizer_from_weights(&w).map_err(|e| CliError::field(at("weights"), e.to_string()))?;
            prepared.weights = Some(w);
        }
        Algorithm::Gerstewitz => {
            forbid(weights, &at("weights"), algorithm)?;
            let s = require(scalarizer, &at("scalarizer"), algorithm)?.build(&at("scalarizer"))?;
            if s.dim() != m {
                return Err(CliError::field(
                    at("scalarizer.k0"),
                    format!("scalarizer acts on R^{} but the problem has {m} objectives", s.dim()),
                ));
            }
            prepared.scalarizer = Some(s);
        }
    }
    Ok(prepared)
}

pub fn start_point(x0: &Option<Vec<f64>>, n: usize) -> Result<Vec<f64>, CliError> {
    let x0 = x0.as_ref().ok_or_else(|| CliError::field("x0", "required"))?;
    if x0.len() != n {
        return Err(CliError::field(
            "x0",
            format!("expected {n} coordinates, got {}", x0.len()),
        ));
    }
    Point::new(x0.clone()).map_err(|e| CliError::field("x0", e.to_string()))?;
    Ok(x0.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_builtin_and_inline_problems() {
        let cfg = parse(r#"{"problem": "ex1_scalar", "algorithm": "descent", "x0": [3, 0], "solver": {"step": 0.1}}"#)
            .unwrap();
        assert!(matches!(cfg.problem, ProblemConfig::Builtin(ref n) if n == "ex1_scalar"));
        assert_eq!(cfg.algorithm, Some(Algorithm::Descent));

        let cfg = parse(r#"{"problem": {"objectives": [{"q": [[1]], "b": [-6], "c": 9}]}}"#).unwrap();
        let p = cfg.problem.build().unwrap();
        assert_eq!(p.dim(), 1);

        let cfg = parse(r#"{"problem": {"random": {"seed": 42, "n": 10}}}"#).unwrap();
        assert_eq!(cfg.problem.build().unwrap().dim(), 10);
    }

    #[test]
    fn reports_field_path_and_line() {
        let text = "{\n  \"problem\": \"ex1_scalar\",\n  \"solver\": {\"step\": \"big\"}\n}";
        let err = parse(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("solver.step"), "{msg}");
        assert!(msg.contains("line 3"), "{msg}");

        let err = parse(r#"{"problem": "ex1_scalar", "colour": 1}"#).unwrap_err();
        assert!(err.to_string().contains("colour"));

        let err = parse(r#"{"problem": {"objectives": [], "random": {"seed": 1, "n": 2}}}"#).unwrap_err();
        assert!(err.to_string().contains("exactly one"), "{err}");
    }

    #[test]
    fn zero_mode_and_snap() {
        let block: SolverBlock =
            serde_json::from_str(r#"{"step": 0.1, "zero_mode": {"tol": 1e-6}}"#).unwrap();
        let cfg = block.build("solver").unwrap();
        assert_eq!(cfg.zero_mode, ZeroMode::Tol(1e-6));
        assert!(cfg.snap);

        let block: SolverBlock =
            serde_json::from_str(r#"{"step": 0.1, "zero_mode": {"tol": 1e-6}, "snap": false}"#).unwrap();
        assert!(!block.build("solver").unwrap().snap);

        let block: SolverBlock = serde_json::from_str(r#"{"step": -1}"#).unwrap();
        assert!(block.build("solver").is_err());
    }

    #[test]
    fn algorithm_fields_must_match() {
        let solver: SolverBlock = serde_json::from_str(r#"{"step": 0.1}"#).unwrap();
        let w = Some(vec![0.5, 0.5]);
        let err = prepare("", Algorithm::Descent, &w, &None, &solver, 1).err().unwrap();
        assert!(err.to_string().contains("weights"));

        let err = prepare("", Algorithm::WeightSum, &None, &None, &solver, 2).err().unwrap();
        assert!(err.to_string().contains("required"));

        let err = prepare("", Algorithm::WeightSum, &Some(vec![1.0]), &None, &solver, 2).err().unwrap();
        assert!(err.to_string().contains("expected 2 weights"));

        let s = Some(ScalarizerConfig {
            halfspaces: vec![vec![1.0, 1.0, 0.0]],
            k0: vec![1.0, 1.0],
        });
        assert!(prepare("", Algorithm::Gerstewitz, &None, &s, &solver, 2).is_ok());
        let err = prepare("", Algorithm::Gerstewitz, &None, &s, &solver, 3).err().unwrap();
        assert!(err.to_string().contains("scalarizer.k0"));

        let with_escapes: SolverBlock = serde_json::from_str(r#"{"step": 0.1, "escape_limit": 2}"#).unwrap();
        assert!(prepare("", Algorithm::Multistart, &None, &None, &with_escapes, 1).is_ok());
        assert!(prepare("", Algorithm::Descent, &None, &None, &with_escapes, 1).is_err());
        assert!(prepare("", Algorithm::Descent, &None, &None, &solver, 2).is_err());
    }

    #[test]
    fn start_point_checks() {
        assert!(start_point(&None, 2).is_err());
        assert!(start_point(&Some(vec![1.0]), 2).is_err());
        assert_eq!(start_point(&Some(vec![1.0, 2.0]), 2).unwrap(), vec![1.0, 2.0]);
    }
}
