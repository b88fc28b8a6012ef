use std::fmt::Write as _;

use super::SweepResult;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN: f64 = 50.0;

/// Scatter of coordinate `coord` (zero-based) against `pi`: stable points
/// filled, unstable points hollow.
pub fn diagram_svg(res: &SweepResult, coord: usize) -> String {
    let points: Vec<(f64, f64, bool)> = res
        .branches
        .iter()
        .flat_map(|b| b.points.iter())
        .filter(|e| coord < e.state.len())
        .map(|e| (e.pi, e.state[coord], e.is_stable()))
        .collect();
    let (pi_lo, pi_hi) = bounds(res.grid.iter().copied());
    let (y_lo, y_hi) = bounds(points.iter().map(|p| p.1));
    let sx = |pi: f64| MARGIN + (pi - pi_lo) / (pi_hi - pi_lo) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        out,
        r#"<path d="M{m} {b} H{r} M{m} {b} V{m}" stroke="black" fill="none"/>"#,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    )
    .unwrap();
    for (value, x, y, anchor) in [
        (pi_lo, sx(pi_lo), HEIGHT - MARGIN + 18.0, "middle"),
        (pi_hi, sx(pi_hi), HEIGHT - MARGIN + 18.0, "middle"),
    ] {
        writeln!(
            out,
            r#"<text x="{x:.1}" y="{y:.1}" font-size="12" text-anchor="{anchor}">{value:.3}</text>"#
        )
        .unwrap();
    }
    for value in [y_lo, y_hi] {
        writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="end">{value:.3}</text>"#,
            MARGIN - 6.0,
            sy(value) + 4.0
        )
        .unwrap();
    }
    writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-size="13" text-anchor="middle">pi</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="14" y="{:.1}" font-size="13" text-anchor="middle">x{}</text>"#,
        HEIGHT / 2.0,
        coord + 1
    )
    .unwrap();
    for (pi, y, stable) in points {
        let fill = if stable { "black" } else { "none" };
        writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{fill}" stroke="black" stroke-width="0.6"/>"#,
            sx(pi),
            sy(y)
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = ((hi - lo) * 0.05).max(1e-3);
    (lo - pad, hi + pad)
}
