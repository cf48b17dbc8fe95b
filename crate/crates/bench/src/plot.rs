//! Log-scale cost curves as standalone SVG.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{BenchError, Result};
use crate::experiment::AggregateRecord;

/// Costs below this are drawn at this value.
pub const COST_FLOOR: f64 = 1e-16;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 130.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// One line of the chart.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub values: Vec<f64>,
}

/// Best-run history of every optimizer in the record.
pub fn record_series(record: &AggregateRecord) -> Vec<Series> {
    record
        .results
        .iter()
        .map(|r| Series { label: r.optimizer.clone(), values: r.best.cost_history.clone() })
        .collect()
}

/// `None` when there is nothing to draw.
pub fn render_svg(title: &str, series: &[Series]) -> Option<String> {
    let series: Vec<&Series> = series.iter().filter(|s| !s.values.is_empty()).collect();
    if series.is_empty() {
        return None;
    }
    let logs = |s: &Series| -> Vec<f64> { s.values.iter().map(|v| v.max(COST_FLOOR).log10()).collect() };
    let all: Vec<f64> = series.iter().flat_map(|s| logs(s)).filter(|v| v.is_finite()).collect();
    let mut lo = all.iter().copied().fold(f64::INFINITY, f64::min).floor();
    let mut hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max).ceil();
    if !lo.is_finite() || !hi.is_finite() {
        lo = COST_FLOOR.log10();
        hi = 0.0;
    }
    if hi <= lo {
        hi = lo + 1.0;
    }
    let max_iter = series.iter().map(|s| s.values.len() - 1).max().unwrap_or(0).max(1) as f64;

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |i: f64| LEFT + plot_w * i / max_iter;
    let py = |l: f64| TOP + plot_h * (hi - l) / (hi - lo);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{:.1}" y="18" text-anchor="middle">{}</text>"#, LEFT + plot_w / 2.0, escape(title));

    let decades = (hi - lo) as i64;
    let step = (decades as f64 / 8.0).ceil().max(1.0) as i64;
    for k in (0..=decades).step_by(step as usize) {
        let l = lo + k as f64;
        let y = py(l);
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##,
            LEFT + plot_w
        );
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.2}" text-anchor="end">1e{}</text>"#, LEFT - 6.0, y + 4.0, l as i64);
    }
    let ticks = 8.0_f64.min(max_iter);
    for k in 0..=ticks as usize {
        let i = (max_iter * k as f64 / ticks).round();
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.1}" text-anchor="middle">{}</text>"#,
            px(i),
            TOP + plot_h + 18.0,
            i as usize
        );
    }
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">iteration</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">cost</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let points: Vec<String> =
            logs(s).iter().enumerate().map(|(i, l)| format!("{:.2},{:.2}", px(i as f64), py(*l))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let ly = TOP + 16.0 + 18.0 * k as f64;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&s.label));
    }
    svg.push_str("</svg>\n");
    Some(svg)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes the cost chart of `record`. Returns `false`, after printing a
/// warning, when the record has no history to draw.
pub fn emit_plot(record: &AggregateRecord, path: &Path) -> Result<bool> {
    let title = format!("{} ({})", record.config.experiment, record.cost);
    match render_svg(&title, &record_series(record)) {
        Some(svg) => {
            std::fs::write(path, svg).map_err(|e| BenchError::io(path, e))?;
            Ok(true)
        }
        None => {
            eprintln!("warning: no cost history to plot, skipping {}", path.display());
            Ok(false)
        }
    }
}
