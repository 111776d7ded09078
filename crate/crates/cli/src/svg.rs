//! Static loss-curve plots.

use std::fmt::Write;

use aaseq_core::trainer::TrainingTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesRole {
    WithAa,
    WithoutAa,
}

impl SeriesRole {
    pub fn color(self) -> &'static str {
        match self {
            SeriesRole::WithAa => "green",
            SeriesRole::WithoutAa => "red",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub role: SeriesRole,
    pub trace: TrainingTrace,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 450.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 60.0;
const TICKS: usize = 5;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Renders loss against iteration, one polyline per series. Output depends
/// only on the series, so identical inputs give identical bytes.
pub fn render(series: &[Series]) -> String {
    let max_iter = series
        .iter()
        .flat_map(|s| s.trace.records.iter().map(|r| r.iteration))
        .max()
        .unwrap_or(1)
        .max(2) as f64;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in series.iter().flat_map(|s| &s.trace.records) {
        lo = lo.min(r.mean_loss);
        hi = hi.max(r.mean_loss);
    }
    if !lo.is_finite() || !hi.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |it: f64| LEFT + (it - 1.0) / (max_iter - 1.0) * plot_w;
    let sy = |v: f64| TOP + (hi - v) / (hi - lo) * plot_h;

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<g stroke="black" stroke-width="1"><line x1="{LEFT}" y1="{b}" x2="{r}" y2="{b}"/><line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{b}"/></g>"#,
        b = TOP + plot_h,
        r = LEFT + plot_w
    );

    let _ = writeln!(
        out,
        r#"<g font-family="sans-serif" font-size="11" fill="black">"#
    );
    for i in 0..=TICKS {
        let f = i as f64 / TICKS as f64;
        let it = 1.0 + f * (max_iter - 1.0);
        let x = sx(it);
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + plot_h + 16.0,
            it.round()
        );
        let v = lo + f * (hi - lo);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            sy(v) + 4.0,
            tick_label(v)
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle">iterations</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 16.0
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{y:.2}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 18 {y:.2})">cross entropy loss</text>"#,
        y = TOP + plot_h / 2.0
    );

    for s in series {
        let mut pts = String::new();
        for (i, r) in s.trace.records.iter().enumerate() {
            if i > 0 {
                pts.push(' ');
            }
            let _ = write!(pts, "{:.2},{:.2}", sx(r.iteration as f64), sy(r.mean_loss));
        }
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{pts}"/>"#,
            s.role.color()
        );
    }

    let _ = writeln!(out, r#"<g font-family="sans-serif" font-size="12">"#);
    for (i, s) in series.iter().enumerate() {
        let y = TOP + 14.0 + 18.0 * i as f64;
        let x = LEFT + plot_w - 200.0;
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            x + 24.0,
            s.role.color(),
            x + 30.0,
            y + 4.0,
            escape(&s.label)
        );
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    out
}
