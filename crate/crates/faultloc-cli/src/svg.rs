//! Minimal static SVG scatter rendering for predicted-vs-actual plots.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 640.0;
const MARGIN: f64 = 60.0;

/// Renders actual-vs-predicted points with the ideal y = x reference line.
pub fn scatter_svg(points: &[(f64, f64)]) -> String {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(a, p) in points {
        lo = lo.min(a).min(p);
        hi = hi.max(a).max(p);
    }
    if !lo.is_finite() || !hi.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    if hi - lo < 1e-9 {
        hi = lo + 1.0;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let span = hi - lo;
    let scale = (WIDTH - 2.0 * MARGIN) / span;
    let x_px = |v: f64| MARGIN + (v - lo) * scale;
    let y_px = |v: f64| HEIGHT - MARGIN - (v - lo) * scale;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    // Axes.
    let _ = writeln!(
        svg,
        r#"<line x1="{m}" y1="{b}" x2="{r}" y2="{b}" stroke="black" stroke-width="1"/>"#,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{m}" y1="{m}" x2="{m}" y2="{b}" stroke="black" stroke-width="1"/>"#,
        m = MARGIN,
        b = HEIGHT - MARGIN
    );
    // Tick labels at the corners of the data range.
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{:.0}</text>"#,
        x_px(lo + pad),
        HEIGHT - MARGIN + 20.0,
        lo + pad
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{:.0}</text>"#,
        x_px(hi - pad),
        HEIGHT - MARGIN + 20.0,
        hi - pad
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="end">{:.0}</text>"#,
        MARGIN - 8.0,
        y_px(lo + pad) + 4.0,
        lo + pad
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="end">{:.0}</text>"#,
        MARGIN - 8.0,
        y_px(hi - pad) + 4.0,
        hi - pad
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="14" text-anchor="middle">actual fault distance (km)</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{}" font-size="14" text-anchor="middle" transform="rotate(-90 18 {y})">predicted fault distance (km)</text>"#,
        HEIGHT / 2.0,
        y = HEIGHT / 2.0
    );
    // Ideal relationship.
    let _ = writeln!(
        svg,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="blue" stroke-width="1.5"/>"#,
        x_px(lo),
        y_px(lo),
        x_px(hi),
        y_px(hi)
    );
    for &(a, p) in points {
        let _ = writeln!(
            svg,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="black" fill-opacity="0.55"/>"#,
            x_px(a),
            y_px(p)
        );
    }
    svg.push_str("</svg>\n");
    svg
}
