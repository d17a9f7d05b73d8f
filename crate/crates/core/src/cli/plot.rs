//! Static SVG line plots.

use std::fmt::Write as _;

use thiserror::Error;

use crate::experiments::Provenance;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Error, PartialEq)]
pub enum PlotError {
    #[error("series `{0}` needs at least two plottable points")]
    EmptySeries(String),
    #[error("nothing to plot")]
    NoSeries,
}

/// One curve.
#[derive(Debug, Clone, Copy)]
pub struct Curve<'a> {
    pub label: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

#[derive(Debug, Clone, Default)]
pub struct PlotStyle {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub provenance: Option<Provenance>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Round-number ticks covering `[lo, hi]`.
fn linear_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e4).contains(&a) {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Renders curves into a standalone SVG document.
pub fn emit_plot(curves: &[Curve<'_>], style: &PlotStyle) -> Result<String, PlotError> {
    if curves.is_empty() {
        return Err(PlotError::NoSeries);
    }
    let ty = |y: f64| if style.log_y { y.log10() } else { y };
    let mut points: Vec<Vec<(f64, f64)>> = Vec::new();
    for c in curves {
        let pts: Vec<(f64, f64)> = c
            .x
            .iter()
            .zip(c.y)
            .filter(|(x, y)| x.is_finite() && y.is_finite() && (!style.log_y || **y > 0.0))
            .map(|(&x, &y)| (x, ty(y)))
            .collect();
        if pts.len() < 2 {
            return Err(PlotError::EmptySeries(c.label.to_string()));
        }
        points.push(pts);
    }
    let all = points.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        (x0, x1, y0, y1) = (x0.min(x), x1.max(x), y0.min(y), y1.max(y));
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if style.log_y {
        y0 = y0.floor();
        y1 = y1.ceil().max(y0 + 1.0);
    } else if y1 <= y0 {
        (y0, y1) = (y0 - 0.5, y1 + 0.5);
    } else {
        let pad = 0.05 * (y1 - y0);
        (y0, y1) = (y0 - pad, y1 + pad);
    }
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    if let Some(p) = &style.provenance {
        let _ = writeln!(svg, "<!-- spec_hash={} master_seed={} -->", p.spec_hash, p.master_seed);
    }
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);

    for t in linear_ticks(x0, x1) {
        let x = sx(t);
        let _ = writeln!(svg, r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, TOP + ph, TOP + ph + 5.0);
        let _ = writeln!(svg, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, TOP + ph + 18.0, tick_label(t));
    }
    let yticks: Vec<f64> = if style.log_y { (y0 as i64..=y1 as i64).map(|k| k as f64).collect() } else { linear_ticks(y0, y1) };
    for t in yticks {
        let y = sy(t);
        let label = if style.log_y { format!("1e{}", t as i64) } else { tick_label(t) };
        let _ = writeln!(svg, r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/>"#, LEFT - 5.0);
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#, LEFT - 8.0, y + 4.0);
    }
    let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">{}</text>"#, LEFT + pw / 2.0, TOP - 14.0, escape(&style.title));
    let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, HEIGHT - 12.0, escape(&style.x_label));
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(&style.y_label)
    );

    for (i, (c, pts)) in curves.iter().zip(&points).enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(svg, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
        let ly = TOP + 16.0 + 20.0 * i as f64;
        let lx = LEFT + pw + 14.0;
        let _ = writeln!(svg, r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#, lx + 24.0);
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 30.0, ly + 4.0, escape(c.label));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_is_rejected() {
        let c = Curve { label: "a", x: &[0.0], y: &[1.0] };
        assert_eq!(emit_plot(&[c], &PlotStyle::default()), Err(PlotError::EmptySeries("a".into())));
        assert_eq!(emit_plot(&[], &PlotStyle::default()), Err(PlotError::NoSeries));
    }

    #[test]
    fn log_plot_drops_nonpositive_and_has_decades() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [0.0, 1.0, 0.1, 0.01];
        let style = PlotStyle { log_y: true, ..Default::default() };
        let svg = emit_plot(&[Curve { label: "H", x: &x, y: &y }], &style).unwrap();
        assert!(svg.contains("1e-2") && svg.contains("1e0"));
        assert_eq!(svg.matches("<polyline").count(), 1);
    }

    #[test]
    fn overlay_provenance_and_escaping() {
        let x = [0.0, 1.0];
        let style = PlotStyle {
            title: "P & |psi|<sup>".into(),
            provenance: Some(Provenance { spec_hash: "abc".into(), master_seed: 7 }),
            ..Default::default()
        };
        let svg = emit_plot(&[Curve { label: "P", x: &x, y: &[1.0, 2.0] }, Curve { label: "|psi|²", x: &x, y: &[2.0, 1.0] }], &style)
            .unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("<!-- spec_hash=abc master_seed=7 -->"));
        assert!(svg.contains("P &amp; |psi|&lt;sup&gt;"));
    }

    #[test]
    fn ticks_are_round() {
        assert_eq!(linear_ticks(0.0, 1.0), vec![0.0, 0.2, 0.4, 0.6000000000000001, 0.8, 1.0]);
    }
}
