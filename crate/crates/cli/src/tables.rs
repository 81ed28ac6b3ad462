//! CSV output: traces, side-by-side comparisons and support catalogs.
//!
//! Reals are written as `{:.16e}` (17 significant digits), so reading a trace
//! back gives the in-memory values bit for bit.

use std::path::Path;

use csv::{Reader, Terminator, Writer, WriterBuilder};
use ell0_core::oracle::SupportCatalog;
use ell0_core::solvers::{StepKind, TraceRow};
use ell0_core::{SolverTrace, SupportPattern, TraceComparison};

use crate::error::CliError;

pub fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn writer(path: &Path) -> Result<Writer<std::fs::File>, CliError> {
    WriterBuilder::new()
        .terminator(Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| CliError::Csv(path.to_owned(), e))
}

fn row_fields(row: &TraceRow) -> Vec<String> {
    let mut out = Vec::with_capacity(row.x.len() + 6);
    out.push(row.k.to_string());
    out.extend(row.x.iter().map(|v| real(*v)));
    out.push(real(row.f));
    out.push(row.l0.to_string());
    out.push(real(row.total));
    out.push(row.support.to_bitstring());
    out.push(row.step_kind.as_str().to_owned());
    out
}

fn trace_header(n: usize, prefix: &str) -> Vec<String> {
    let mut h = Vec::with_capacity(n + 6);
    h.push("k".to_owned());
    h.extend((1..=n).map(|i| format!("{prefix}x_{i}")));
    for name in ["f", "l0", "total", "support", "step_kind"] {
        h.push(format!("{prefix}{name}"));
    }
    h
}

pub fn write_trace(path: &Path, trace: &SolverTrace) -> Result<(), CliError> {
    let csv_err = |e| CliError::Csv(path.to_owned(), e);
    let mut w = writer(path)?;
    w.write_record(trace_header(trace.dim(), "")).map_err(csv_err)?;
    for row in &trace.rows {
        w.write_record(row_fields(row)).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::Io(path.to_owned(), e))
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>, CliError> {
    let bad = |msg: String| CliError::Trace(path.to_owned(), msg);
    let mut r = Reader::from_path(path).map_err(|e| CliError::Csv(path.to_owned(), e))?;
    let header: Vec<String> = r
        .headers()
        .map_err(|e| CliError::Csv(path.to_owned(), e))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header.len() < 7 {
        return Err(bad("missing or short header".into()));
    }
    let n = header.len() - 6;
    if header != trace_header(n, "") {
        return Err(bad(format!("unexpected header `{}`", header.join(","))));
    }
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Csv(path.to_owned(), e))?;
        let at = |what: &str| format!("row {}: bad {what}", line + 1);
        let num = |i: usize| rec[i].parse::<f64>().map_err(|_| bad(at(&header[i])));
        rows.push(TraceRow {
            k: rec[0].parse().map_err(|_| bad(at("k")))?,
            x: (1..=n).map(num).collect::<Result<_, _>>()?,
            f: num(n + 1)?,
            l0: rec[n + 2].parse().map_err(|_| bad(at("l0")))?,
            total: num(n + 3)?,
            support: rec[n + 4].parse::<SupportPattern>().map_err(|_| bad(at("support")))?,
            step_kind: rec[n + 5].parse::<StepKind>().map_err(|_| bad(at("step_kind")))?,
        });
    }
    Ok(rows)
}

/// Both traces row by row, padded with empty cells where one is shorter;
/// `max_coord_diff` is filled on the common prefix.
pub fn write_comparison(
    path: &Path,
    a: &SolverTrace,
    b: &SolverTrace,
    cmp: &TraceComparison,
) -> Result<(), CliError> {
    let csv_err = |e| CliError::Csv(path.to_owned(), e);
    let n = a.dim();
    let mut header = trace_header(n, "a_");
    header.extend(trace_header(n, "b_").into_iter().skip(1));
    header.push("max_coord_diff".into());
    let mut w = writer(path)?;
    w.write_record(&header).map_err(csv_err)?;
    let side = |t: &SolverTrace, k: usize| match t.rows.get(k) {
        Some(row) => row_fields(row).split_off(1),
        None => vec![String::new(); n + 5],
    };
    for k in 0..a.rows.len().max(b.rows.len()) {
        let mut rec = vec![k.to_string()];
        rec.extend(side(a, k));
        rec.extend(side(b, k));
        rec.push(cmp.max_coord_diff.get(k).map(|d| real(*d)).unwrap_or_default());
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::Io(path.to_owned(), e))
}

pub fn write_catalog(path: &Path, catalog: &SupportCatalog) -> Result<(), CliError> {
    let csv_err = |e| CliError::Csv(path.to_owned(), e);
    let n = catalog.entries.first().map_or(0, |e| e.support.dim());
    let mut header = vec!["support_bits".to_owned()];
    header.extend((1..=n).map(|i| format!("x*_{i}")));
    header.extend(["f", "l0_effective", "total", "is_local_min"].map(str::to_owned));
    let mut w = writer(path)?;
    w.write_record(&header).map_err(csv_err)?;
    for e in &catalog.entries {
        let mut rec = vec![e.support.to_bitstring()];
        rec.extend(e.minimizer.iter().map(|v| real(*v)));
        rec.push(real(e.value));
        rec.push(e.effective_l0.to_string());
        rec.push(real(e.total));
        rec.push(e.is_local_min().to_string());
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::Io(path.to_owned(), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ell0_core::problems::builtin;
    use ell0_core::solvers::solve_l0_descent;
    use ell0_core::SolverConfig;

    #[test]
    fn real_format_round_trips() {
        for v in [0.1, -0.0, 1.0 / 3.0, 2.9999999999999996, 1e-300, -123456.789] {
            let s = real(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(real(2.6), "2.6000000000000001e0");
    }

    #[test]
    fn trace_round_trip() {
        let f = builtin("ex1_scalar").unwrap().objectives.remove(0);
        let trace = solve_l0_descent(&f, &[-3.0, 2.0], &SolverConfig::new(0.1)).unwrap();
        let dir = std::env::temp_dir().join(format!("ell0-tables-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.csv");
        write_trace(&path, &trace).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("k,x_1,x_2,f,l0,total,support,step_kind\n"));
        assert!(!text.contains('\r'));
        assert_eq!(read_trace(&path).unwrap(), trace.rows);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
