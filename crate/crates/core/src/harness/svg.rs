//! Static SVG charts: step charts for observable series and a colored grid
//! for partitions. Every plotted point carries a `data-value` attribute with
//! the exact string written to the matching CSV.

use std::fmt::Write as _;

use crate::patterns::{Geometry, PatternClassMap};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 48.0;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

/// One line of a chart. Points are `(x, y, text)` where `text` is the CSV
/// rendering of `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64, String)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

/// A step chart, one polyline per series.
pub fn step_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (x0, x1) = span(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (y0, y1) = span(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r#"<line x1="{MARGIN}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{b}" stroke="black"/>"#,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{}" transform="rotate(-90 14 {})" text-anchor="middle" font-family="sans-serif" font-size="12">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    for (tick, v) in [(y0, y0), (y1, y1)] {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="10">{:.4}</text>"#,
            MARGIN - 4.0,
            py(tick) + 3.0,
            v
        );
    }
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut path = String::new();
        for (n, (x, y, _)) in s.points.iter().enumerate() {
            if n == 0 {
                let _ = write!(path, "M{:.3},{:.3}", px(*x), py(*y));
            } else {
                // horizontal then vertical: value held until the next step
                let _ = write!(path, " H{:.3} V{:.3}", px(*x), py(*y));
            }
        }
        let _ = writeln!(
            out,
            r#"<g class="series" data-series="{}"><path d="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            escape(&s.name)
        );
        for (x, y, text) in &s.points {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.3}" cy="{:.3}" r="3" fill="{color}" data-x="{x}" data-value="{}"/>"#,
                px(*x),
                py(*y),
                escape(text)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" fill="{color}">{}</text></g>"#,
            WIDTH - MARGIN + 4.0 - 120.0,
            MARGIN + 14.0 * k as f64,
            escape(&s.name)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Cells of a partition colored by class. Interval partitions are drawn as
/// one row of bars.
pub fn partition_grid(map: &PatternClassMap) -> String {
    let (cols, rows) = match map.geometry() {
        Geometry::Interval { .. } => (map.cell_count(), 1),
        Geometry::Square { shape, .. } => (shape.right_cells(), shape.left_cells()),
    };
    let side = ((WIDTH - 2.0 * MARGIN) / cols as f64).min((WIDTH - 2.0 * MARGIN) / rows as f64).max(1.0);
    let h = if rows == 1 { 40.0 } else { side };
    let (w_total, h_total) = (2.0 * MARGIN + side * cols as f64, 2.0 * MARGIN + h * rows as f64);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w_total}" height="{h_total}" viewBox="0 0 {w_total} {h_total}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for cell in 0..map.cell_count() {
        let class = map.class_of(cell);
        let color = class_color(class, map.class_count());
        // y1 (input) runs left to right, y2 (stack) bottom to top
        let (col, row) = match map.geometry() {
            Geometry::Interval { .. } => (cell, 0),
            Geometry::Square { .. } => {
                let c = map.square_cell(cell);
                (c.right, rows - 1 - c.left)
            }
        };
        let _ = writeln!(
            out,
            r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{color}" stroke="white" stroke-width="0.5" data-cell="{cell}" data-class="{class}"/>"#,
            MARGIN + side * col as f64,
            MARGIN + h * row as f64,
            side,
            h
        );
    }
    out.push_str("</svg>\n");
    out
}

fn class_color(class: usize, classes: usize) -> String {
    if classes <= PALETTE.len() {
        return PALETTE[class].to_string();
    }
    // spread hues evenly; lightness alternates so neighbours stay apart
    let hue = (class as f64 * 360.0 / classes as f64).round();
    let light = if class % 2 == 0 { 45 } else { 65 };
    format!("hsl({hue},70%,{light}%)")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::interval_partition;

    #[test]
    fn chart_points_carry_csv_text() {
        let s = Series {
            name: "a<b".into(),
            points: vec![(0.0, 0.25, "0.25".into()), (1.0, 0.5, "0.5".into())],
        };
        let svg = step_chart("t", "x", "y", &[s]);
        assert!(svg.contains(r#"data-value="0.25""#));
        assert!(svg.contains(r#"data-value="0.5""#));
        assert!(svg.contains("a&lt;b"));
        assert_eq!(svg.matches("<circle").count(), 2);
    }

    #[test]
    fn grid_has_one_rect_per_cell() {
        let map = interval_partition(3, 3, true).unwrap();
        let svg = partition_grid(&map);
        assert_eq!(svg.matches("data-cell=").count(), 27);
    }
}
