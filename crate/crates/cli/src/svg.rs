//! Minimal self-contained SVG line charts.
//!
//! One fixed-size chart style: titled axes with tick labels, one polyline
//! per series, and a legend. No external renderer or template — the output
//! is a single standalone `.svg` file whose bytes are a pure function of
//! the input.

use std::fmt::Write as _;
use std::path::Path;

use crate::csvio::write_text;
use crate::error::Result;

/// One named polyline.
#[derive(Debug, Clone, PartialEq)]
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

const WIDTH: f64 = 840.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 48.0;
const MARGIN_BOTTOM: f64 = 56.0;
const TICKS: usize = 5;

/// Color cycle; wraps when a chart has more series than entries.
const PALETTE: [&str; 6] = [
    "#1f6fb2", "#d1495b", "#2e8b57", "#e0a100", "#7b5ea7", "#5c5c5c",
];

/// Render a line chart; empty series and single points are tolerated.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (x_min, x_max) = padded_range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (y_min, y_max) = padded_range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = |y: f64| MARGIN_TOP + plot_h - (y - y_min) / (y_max - y_min) * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\">"
    );
    let _ = writeln!(
        out,
        "  <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );
    let _ = writeln!(
        out,
        "  <text x=\"{:.1}\" y=\"24\" font-size=\"16\" text-anchor=\"middle\">{}</text>",
        WIDTH / 2.0,
        escape(title)
    );

    // Gridlines and tick labels.
    for i in 0..=TICKS {
        let f = i as f64 / TICKS as f64;
        let xv = x_min + f * (x_max - x_min);
        let yv = y_min + f * (y_max - y_min);
        let xp = sx(xv);
        let yp = sy(yv);
        let _ = writeln!(
            out,
            "  <line x1=\"{xp:.1}\" y1=\"{:.1}\" x2=\"{xp:.1}\" y2=\"{:.1}\" \
             stroke=\"#dddddd\"/>",
            MARGIN_TOP,
            MARGIN_TOP + plot_h
        );
        let _ = writeln!(
            out,
            "  <line x1=\"{:.1}\" y1=\"{yp:.1}\" x2=\"{:.1}\" y2=\"{yp:.1}\" \
             stroke=\"#dddddd\"/>",
            MARGIN_LEFT,
            MARGIN_LEFT + plot_w
        );
        let _ = writeln!(
            out,
            "  <text x=\"{xp:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\">{}</text>",
            MARGIN_TOP + plot_h + 18.0,
            tick_label(xv)
        );
        let _ = writeln!(
            out,
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"end\">{}</text>",
            MARGIN_LEFT - 8.0,
            yp + 4.0,
            tick_label(yv)
        );
    }

    // Axes.
    let _ = writeln!(
        out,
        "  <rect x=\"{:.1}\" y=\"{:.1}\" width=\"{plot_w:.1}\" height=\"{plot_h:.1}\" \
         fill=\"none\" stroke=\"#333333\"/>",
        MARGIN_LEFT, MARGIN_TOP
    );
    let _ = writeln!(
        out,
        "  <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\">{}</text>",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 14.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        "  <text x=\"18\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\" \
         transform=\"rotate(-90 18 {:.1})\">{}</text>",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape(y_label)
    );

    // Series.
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if s.points.len() == 1 {
            let (x, y) = s.points[0];
            let _ = writeln!(
                out,
                "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>",
                sx(x),
                sy(y)
            );
        } else if !s.points.is_empty() {
            let mut d = String::new();
            for (x, y) in &s.points {
                let _ = write!(d, "{:.2},{:.2} ", sx(*x), sy(*y));
            }
            let _ = writeln!(
                out,
                "  <polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" \
                 stroke-width=\"1.8\"/>",
                d.trim_end()
            );
        }
        // Legend row.
        let ly = MARGIN_TOP + 14.0 + i as f64 * 17.0;
        let lx = MARGIN_LEFT + plot_w - 150.0;
        let _ = writeln!(
            out,
            "  <line x1=\"{lx:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" \
             stroke=\"{color}\" stroke-width=\"2.5\"/>",
            lx + 22.0
        );
        let _ = writeln!(
            out,
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\">{}</text>",
            lx + 28.0,
            ly + 4.0,
            escape(&s.label)
        );
    }

    out.push_str("</svg>\n");
    out
}

/// Render and write in one step.
pub fn write_line_chart(
    path: &Path,
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
) -> Result<()> {
    write_text(path, &line_chart(title, x_label, y_label, series))
}

/// Data range expanded by 5% on each side; degenerate ranges get a unit pad
/// so the scale transform stays finite.
fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    let span = hi - lo;
    if span == 0.0 {
        (lo - 1.0, hi + 1.0)
    } else {
        (lo - 0.05 * span, hi + 0.05 * span)
    }
}

/// Compact tick formatting: plain decimals in a sane range, scientific
/// notation outside it.
fn tick_label(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && (a >= 1e4 || a < 1e-3) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
            .trim_end_matches('0')
            .trim_end_matches('.')
            .to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_is_deterministic_and_well_formed() {
        let series = vec![
            Series::new("a", vec![(0.0, 1.0), (1.0, 2.0), (2.0, 1.5)]),
            Series::new("b", vec![(0.0, 0.5), (1.0, 0.25), (2.0, 3.0)]),
        ];
        let one = line_chart("title", "step", "value", &series);
        let two = line_chart("title", "step", "value", &series);
        assert_eq!(one, two);
        assert!(one.starts_with("<svg"));
        assert!(one.trim_end().ends_with("</svg>"));
        assert_eq!(one.matches("<polyline").count(), 2);
        assert!(one.contains(">a</text>"));
        assert!(one.contains(">b</text>"));
    }

    #[test]
    fn degenerate_inputs_render() {
        let flat = line_chart("t", "x", "y", &[Series::new("c", vec![(0.0, 2.0), (5.0, 2.0)])]);
        assert!(flat.contains("<polyline"));
        assert!(!flat.contains("NaN"));
        let single = line_chart("t", "x", "y", &[Series::new("p", vec![(1.0, 1.0)])]);
        assert!(single.contains("<circle"));
        let empty = line_chart("t", "x", "y", &[]);
        assert!(empty.starts_with("<svg"));
    }

    #[test]
    fn labels_are_escaped() {
        let c = line_chart("a < b & c", "x", "y", &[]);
        assert!(c.contains("a &lt; b &amp; c"));
    }
}
