//! File writers: CSV, pretty JSON and a fixed-style SVG line chart.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::Value;

use super::CliError;
use crate::io::float17;

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Config(format!("out: cannot write {}: {e}", path.display()))
}

pub(crate) fn write_text(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| io_err(&path, e))
}

pub(crate) fn write_json(dir: &Path, name: &str, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    text.push('\n');
    write_text(dir, name, &text)
}

/// A CSV table with a fixed header.
pub(crate) struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub(crate) fn new(header: &[&str]) -> Self {
        Self { text: format!("{}\n", header.join(",")), columns: header.len() }
    }

    pub(crate) fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.columns);
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub(crate) fn finish(self) -> String {
        self.text
    }
}

/// A float cell; empty when absent or not finite.
pub(crate) fn cell(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => float17(v),
        _ => String::new(),
    }
}

/// One named series of a line chart.
pub(crate) struct Series<'a> {
    pub name: &'a str,
    pub points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn label(x: f64) -> String {
    format!("{x:.3}")
}

/// A minimal SVG line chart with markers, linear axes and a legend.
pub(crate) fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series<'_>]) -> String {
    let pts = series.iter().flat_map(|s| s.points.iter()).filter(|p| p.0.is_finite() && p.1.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(svg, r#"<path d="M{left} {top}V{bottom}H{right}" fill="none" stroke="black"/>"#);
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(svg, r#"<line x1="{px:.2}" y1="{bottom}" x2="{px:.2}" y2="{}" stroke="black"/>"#, bottom + 5.0);
        let _ = writeln!(svg, r#"<text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#, bottom + 18.0, label(xv));
        let _ = writeln!(svg, r#"<line x1="{}" y1="{py:.2}" x2="{left}" y2="{py:.2}" stroke="black"/>"#, left - 5.0);
        let _ = writeln!(svg, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, left - 8.0, py + 4.0, label(yv));
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 16.0, escape(x_label));
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let finite: Vec<(f64, f64)> = s.points.iter().copied().filter(|p| p.0.is_finite() && p.1.is_finite()).collect();
        if finite.is_empty() {
            continue;
        }
        let path: Vec<String> = finite.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(svg, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, path.join(" "));
        for &(x, y) in &finite {
            let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, sx(x), sy(y));
        }
        let ly = top + 16.0 * k as f64;
        let _ = writeln!(svg, r#"<rect x="{}" y="{}" width="10" height="10" fill="{color}"/>"#, right - 110.0, ly - 9.0);
        let _ = writeln!(svg, r#"<text x="{}" y="{ly}">{}</text>"#, right - 95.0, escape(s.name));
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_rows_and_cells() {
        let mut c = Csv::new(&["a", "b"]);
        c.row(&[cell(Some(0.5)), cell(None)]);
        c.row(&[cell(Some(f64::NAN)), "x".into()]);
        assert_eq!(c.finish(), "a,b\n5.0000000000000000e-1,\n,x\n");
    }

    #[test]
    fn chart_is_well_formed() {
        let s = [
            Series { name: "orlicz", points: vec![(1.0, 2.0), (2.0, 3.0)] },
            Series { name: "a<b", points: vec![(1.5, f64::NAN)] },
        ];
        let svg = line_chart("t", "x", "y", &s);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(!svg.contains("a<b"));
        let empty = line_chart("t", "x", "y", &[]);
        assert!(empty.contains("</svg>"));
    }
}
