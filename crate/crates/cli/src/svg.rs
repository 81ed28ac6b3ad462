//! Minimal SVG rendering of a trace: iterate path (or coordinate vs `k`) and
//! total value vs `k`.

use std::fmt::Write;

use ell0_core::solvers::TraceRow;

use crate::error::CliError;

const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 320.0;
const MARGIN: f64 = 56.0;

struct Panel {
    left: f64,
    x_range: (f64, f64),
    y_range: (f64, f64),
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if (hi - lo).abs() < 1e-12 {
        let pad = lo.abs().max(1.0) * 0.5;
        (lo - pad, hi + pad)
    } else {
        let pad = (hi - lo) * 0.05;
        (lo - pad, hi + pad)
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    padded(lo, hi)
}

fn label(v: f64) -> String {
    if v == 0.0 || (v.abs() >= 1e-3 && v.abs() < 1e5) {
        format!("{:.3}", v)
    } else {
        format!("{v:.2e}")
    }
}

impl Panel {
    fn new(index: usize, x_range: (f64, f64), y_range: (f64, f64)) -> Self {
        Panel {
            left: index as f64 * (PANEL_W + MARGIN) + MARGIN,
            x_range,
            y_range,
        }
    }

    fn sx(&self, x: f64) -> f64 {
        self.left + (x - self.x_range.0) / (self.x_range.1 - self.x_range.0) * PANEL_W
    }

    fn sy(&self, y: f64) -> f64 {
        MARGIN + PANEL_H - (y - self.y_range.0) / (self.y_range.1 - self.y_range.0) * PANEL_H
    }

    fn frame(&self, out: &mut String, title: &str, x_label: &str, y_label: &str) {
        let (l, t) = (self.left, MARGIN);
        let _ = writeln!(
            out,
            r##"<rect x="{l:.2}" y="{t:.2}" width="{PANEL_W}" height="{PANEL_H}" fill="none" stroke="#444"/>"##
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">{title}</text>"#,
            l + PANEL_W / 2.0,
            t - 12.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">{x_label}</text>"#,
            l + PANEL_W / 2.0,
            t + PANEL_H + 36.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12" transform="rotate(-90 {:.2} {:.2})">{y_label}</text>"#,
            l - 40.0,
            t + PANEL_H / 2.0,
            l - 40.0,
            t + PANEL_H / 2.0
        );
        for i in 0..=4 {
            let fx = self.x_range.0 + (self.x_range.1 - self.x_range.0) * i as f64 / 4.0;
            let fy = self.y_range.0 + (self.y_range.1 - self.y_range.0) * i as f64 / 4.0;
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="10">{}</text>"#,
                self.sx(fx),
                t + PANEL_H + 14.0,
                label(fx)
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="10">{}</text>"#,
                l - 4.0,
                self.sy(fy) + 3.0,
                label(fy)
            );
        }
    }

    fn polyline(&self, out: &mut String, points: &[(f64, f64)], color: &str) {
        let pts: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", self.sx(x), self.sy(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
        for ((x, y), fill) in [(points[0], "#2a7"), (points[points.len() - 1], "#c33")] {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{fill}"/>"#,
                self.sx(x),
                self.sy(y)
            );
        }
    }
}

/// Renders `rows` as an SVG document. With `value_only` only the total-value
/// panel is drawn; otherwise the trace must have dimension 1 or 2.
pub fn render(rows: &[TraceRow], value_only: bool) -> Result<String, CliError> {
    if rows.is_empty() {
        return Err(CliError::Usage("trace has no rows".into()));
    }
    let n = rows[0].x.len();
    if !value_only && n > 2 {
        return Err(CliError::Usage(format!(
            "cannot draw an iterate path in dimension {n}; rerun with --value-only"
        )));
    }
    let panels = if value_only { 1 } else { 2 };
    let width = panels as f64 * (PANEL_W + MARGIN) + MARGIN;
    let height = PANEL_H + 2.0 * MARGIN;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);

    let k_range = padded(rows[0].k as f64, rows[rows.len() - 1].k as f64);
    let mut index = 0;
    if !value_only {
        let points: Vec<(f64, f64)> = if n == 2 {
            rows.iter().map(|r| (r.x[0], r.x[1])).collect()
        } else {
            rows.iter().map(|r| (r.k as f64, r.x[0])).collect()
        };
        let panel = if n == 2 {
            Panel::new(0, range(points.iter().map(|p| p.0)), range(points.iter().map(|p| p.1)))
        } else {
            Panel::new(0, k_range, range(points.iter().map(|p| p.1)))
        };
        if n == 2 {
            panel.frame(&mut out, "iterate path", "x_1", "x_2");
        } else {
            panel.frame(&mut out, "iterate", "k", "x_1");
        }
        panel.polyline(&mut out, &points, "#1f5fa8");
        index = 1;
    }

    let values: Vec<(f64, f64)> = rows.iter().map(|r| (r.k as f64, r.total)).collect();
    let panel = Panel::new(index, k_range, range(values.iter().map(|p| p.1)));
    panel.frame(&mut out, "total value f + l0", "k", "total");
    panel.polyline(&mut out, &values, "#b5651d");
    out.push_str("</svg>\n");
    Ok(out)
}
