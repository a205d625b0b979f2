//! Minimal SVG line plots: first column on x, every other column as a series.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Render `rows` as one polyline per y column. A y axis whose positive data
/// spans more than three decades is drawn logarithmically.
pub fn line_plot(title: &str, columns: &[&str], rows: &[Vec<f64>]) -> String {
    let xs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let ys: Vec<f64> = rows.iter().flat_map(|r| r[1..].iter().copied()).filter(|v| v.is_finite()).collect();
    let (x0, x1) = bounds(&xs);
    let positive = ys.iter().all(|v| *v > 0.0);
    let (lo, hi) = bounds(&ys);
    let log = positive && !ys.is_empty() && hi / lo > 1e3;
    let ty = |v: f64| if log { v.log10() } else { v };
    let (y0, y1) = if log { (lo.log10(), hi.log10()) } else { (lo, hi) };
    let px = |x: f64| MARGIN + (x - x0) / span(x0, x1) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (ty(y) - y0) / span(y0, y1) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(svg, r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#, r - l, b - t);
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 15.0, escape(columns[0]));
    let _ = writeln!(svg, r#"<text x="{l}" y="{}" text-anchor="start">{x0:.3e}</text>"#, b + 15.0);
    let _ = writeln!(svg, r#"<text x="{r}" y="{}" text-anchor="end">{x1:.3e}</text>"#, b + 15.0);
    let (ylo, yhi) = if log { (lo, hi) } else { (y0, y1) };
    let _ = writeln!(svg, r#"<text x="{}" y="{b}" text-anchor="end">{ylo:.3e}</text>"#, l - 4.0);
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end">{yhi:.3e}</text>"#, l - 4.0, t + 10.0);
    for (k, name) in columns.iter().enumerate().skip(1) {
        let color = COLORS[(k - 1) % COLORS.len()];
        let points: Vec<String> = rows
            .iter()
            .filter(|r| r[k].is_finite() && (!log || r[k] > 0.0))
            .map(|r| format!("{:.2},{:.2}", px(r[0]), py(r[k])))
            .collect();
        let _ = writeln!(svg, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, points.join(" "));
        let _ = writeln!(svg, r#"<text x="{}" y="{}" fill="{color}">{}</text>"#, r + 5.0 - MARGIN, t + 15.0 * k as f64, escape(name));
    }
    svg.push_str("</svg>\n");
    svg
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo.is_finite() && hi.is_finite() {
        (lo, hi)
    } else {
        (0.0, 1.0)
    }
}

fn span(a: f64, b: f64) -> f64 {
    if b > a {
        b - a
    } else {
        1.0
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_one_polyline_per_series() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, (i * i) as f64, 1.0]).collect();
        let svg = line_plot("t", &["x", "a", "b"], &rows);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn log_axis_for_wide_positive_data() {
        let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64, 10f64.powi(i * 2)]).collect();
        let svg = line_plot("t", &["x", "y"], &rows);
        assert!(svg.contains("1.000e8"));
    }
}
