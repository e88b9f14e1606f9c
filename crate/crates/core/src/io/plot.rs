//! Self-contained SVG line charts.
//!
//! Every chart is written next to a plain data file (same stem, `.dat`) with
//! one `x y` pair per line and series separated by a blank line.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 64.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series {
            label: label.into(),
            points,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PlotSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_log: bool,
    /// Dashed guide of this slope through the first point of the first
    /// series (log-log charts only).
    pub reference_slope: Option<f64>,
}

impl PlotSpec {
    /// Log-log rate chart against ε with a slope-1 guide.
    pub fn rate(title: impl Into<String>, y_label: impl Into<String>) -> Self {
        PlotSpec {
            title: title.into(),
            x_label: "epsilon".into(),
            y_label: y_label.into(),
            log_log: true,
            reference_slope: Some(1.0),
        }
    }
}

/// Axis range in plot coordinates (log10 for log axes).
#[derive(Clone, Copy, Debug)]
struct Range {
    lo: f64,
    hi: f64,
}

impl Range {
    fn of(values: impl Iterator<Item = f64>) -> Range {
        let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
        if !lo.is_finite() {
            return Range { lo: 0.0, hi: 1.0 };
        }
        if hi - lo < 1e-12 * (1.0 + lo.abs()) {
            return Range {
                lo: lo - 0.5,
                hi: hi + 0.5,
            };
        }
        let pad = 0.05 * (hi - lo);
        Range {
            lo: lo - pad,
            hi: hi + pad,
        }
    }

    fn map(&self, v: f64, a: f64, b: f64) -> f64 {
        a + (v - self.lo) / (self.hi - self.lo) * (b - a)
    }
}

fn coord(log: bool, v: f64) -> Option<f64> {
    match log {
        true if v > 0.0 && v.is_finite() => Some(v.log10()),
        true => None,
        false if v.is_finite() => Some(v),
        false => None,
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn tick_label(log: bool, v: f64) -> String {
    if log {
        format!("1e{}", v.round() as i64)
    } else {
        format!("{v:.3}")
    }
}

/// Tick positions in plot coordinates: integer decades for log axes, five
/// evenly spaced values otherwise.
fn ticks(log: bool, r: Range) -> Vec<f64> {
    if log {
        let (a, b) = (r.lo.ceil() as i64, r.hi.floor() as i64);
        if a <= b {
            return (a..=b).map(|k| k as f64).collect();
        }
    }
    (0..5)
        .map(|k| r.lo + (r.hi - r.lo) * k as f64 / 4.0)
        .collect()
}

/// SVG text of the chart.
pub fn render_svg(series: &[Series], spec: &PlotSpec) -> String {
    let log = spec.log_log;
    let pts: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            s.points
                .iter()
                .filter_map(|&(x, y)| Some((coord(log, x)?, coord(log, y)?)))
                .collect()
        })
        .collect();
    let xr = Range::of(pts.iter().flatten().map(|p| p.0));
    let yr = Range::of(pts.iter().flatten().map(|p| p.1));
    let (x0, x1) = (MARGIN, WIDTH - MARGIN / 2.0);
    let (y0, y1) = (HEIGHT - MARGIN, MARGIN / 2.0);
    let px = |x: f64| xr.map(x, x0, x1);
    let py = |y: f64| yr.map(y, y0, y1);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="18" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(&spec.title)
    );
    let _ = writeln!(
        s,
        r#"<path d="M{x0:.1},{y1:.1} L{x0:.1},{y0:.1} L{x1:.1},{y0:.1}" fill="none" stroke="black"/>"#
    );
    for t in ticks(log, xr) {
        let x = px(t);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.1}" y1="{y0:.1}" x2="{x:.1}" y2="{:.1}" stroke="black"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            y0 + 5.0,
            y0 + 18.0,
            tick_label(log, t)
        );
    }
    for t in ticks(log, yr) {
        let y = py(t);
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{y:.1}" x2="{x0:.1}" y2="{y:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            y + 4.0,
            tick_label(log, t)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 16.0,
        escape(&spec.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(&spec.y_label)
    );

    if let (true, Some(k), Some(&(ax, ay))) = (
        log,
        spec.reference_slope,
        pts.first().and_then(|p| p.first()),
    ) {
        let (ya, yb) = (ay + k * (xr.lo - ax), ay + k * (xr.hi - ax));
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="gray" stroke-dasharray="6,4" class="reference"/>"#,
            px(xr.lo),
            py(ya),
            px(xr.hi),
            py(yb)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" fill="gray" text-anchor="end">slope {k}</text>"#,
            x1,
            y1 + 14.0
        );
    }

    let _ = writeln!(
        s,
        r#"<clipPath id="plot"><rect x="{x0:.1}" y="{y1:.1}" width="{:.1}" height="{:.1}"/></clipPath>"#,
        x1 - x0,
        y0 - y1
    );
    for (i, (series, p)) in series.iter().zip(&pts).enumerate() {
        let color = COLORS[i % COLORS.len()];
        if p.len() > 1 {
            let d: Vec<String> = p
                .iter()
                .enumerate()
                .map(|(j, &(x, y))| {
                    format!(
                        "{}{:.1},{:.1}",
                        if j == 0 { 'M' } else { 'L' },
                        px(x),
                        py(y)
                    )
                })
                .collect();
            let _ = writeln!(
                s,
                r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5" clip-path="url(#plot)"/>"#,
                d.join(" ")
            );
        }
        for &(x, y) in p {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{color}"/>"#,
                px(x),
                py(y)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" fill="{color}">{}</text>"#,
            x0 + 10.0,
            y1 + 14.0 + 14.0 * i as f64,
            escape(&series.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn render_dat(series: &[Series]) -> String {
    let mut s = String::new();
    for (i, series) in series.iter().enumerate() {
        if i > 0 {
            s.push('\n');
        }
        let _ = writeln!(s, "# {}", series.label);
        for &(x, y) in &series.points {
            let _ = writeln!(s, "{x:.16e} {y:.16e}");
        }
    }
    s
}

/// Write the SVG at `path` and the data file next to it; returns the data
/// file path.
pub fn emit_plot(series: &[Series], spec: &PlotSpec, path: &Path) -> Result<PathBuf> {
    let dat = path.with_extension("dat");
    std::fs::write(path, render_svg(series, spec)).map_err(|e| Error::io(path, e))?;
    std::fs::write(&dat, render_dat(series)).map_err(|e| Error::io(&dat, e))?;
    Ok(dat)
}
