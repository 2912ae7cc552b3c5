//! Minimal SVG line plot for learning curves.

use std::fmt::Write;

use crate::metrics::EpochRecord;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;

/// Mean error against epoch as a single polyline. With `log_y` the error axis
/// is base-10 logarithmic; non-positive values are floored at the smallest
/// positive one.
pub fn learning_curve_svg(records: &[EpochRecord], title: &str, log_y: bool) -> String {
    let floor = records
        .iter()
        .map(|r| r.mean_e_total)
        .filter(|&v| v > 0.0)
        .fold(f64::INFINITY, f64::min);
    let y_of = |v: f64| {
        if log_y {
            v.max(if floor.is_finite() { floor } else { 1.0 }).log10()
        } else {
            v
        }
    };
    let ys: Vec<f64> = records.iter().map(|r| y_of(r.mean_e_total)).collect();
    let (mut lo, mut hi) = ys
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
    if !log_y {
        lo = lo.min(0.0);
    }
    if !(hi > lo) {
        hi = lo + 1.0;
    }
    let n = records.len().max(2) as f64 - 1.0;
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;

    let mut points = String::new();
    for (i, y) in ys.iter().enumerate() {
        let px = MARGIN + plot_w * i as f64 / n;
        let py = HEIGHT - MARGIN - plot_h * (y - lo) / (hi - lo);
        let _ = write!(points, "{px:.2},{py:.2} ");
    }

    let axis_label = if log_y { "log10 mean E_total" } else { "mean E_total" };
    let fmt_tick = |v: f64| if log_y { format!("1e{v:.1}") } else { format!("{v:.3}") };
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="25" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<path d="M{MARGIN},{MARGIN} V{} H{}" fill="none" stroke="black"/>"#,
        HEIGHT - MARGIN,
        WIDTH - MARGIN
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">epoch (1..{})</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0,
        records.len()
    );
    let _ = writeln!(
        svg,
        r#"<text x="15" y="{}" transform="rotate(-90 15 {})" text-anchor="middle" font-family="sans-serif" font-size="12">{axis_label}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="10">{}</text>"#,
        MARGIN - 4.0,
        MARGIN + 4.0,
        fmt_tick(hi)
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="10">{}</text>"#,
        MARGIN - 4.0,
        HEIGHT - MARGIN,
        fmt_tick(lo)
    );
    let _ = writeln!(
        svg,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#,
        points.trim_end()
    );
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn recs(values: &[f64]) -> Vec<EpochRecord> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| EpochRecord {
                epoch: i + 1,
                mean_e_total: v,
                std_e_total: 0.0,
            })
            .collect()
    }

    #[test]
    fn one_point_per_epoch() {
        let svg = learning_curve_svg(&recs(&[4.0, 2.0, 1.0]), "slp <OR>", false);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("slp &lt;OR&gt;"));
        let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let pts = line.split('"').nth(1).unwrap();
        assert_eq!(pts.split(' ').count(), 3);
    }

    #[test]
    fn log_axis_survives_zeros_and_flat_curves() {
        let svg = learning_curve_svg(&recs(&[1.0, 0.0]), "t", true);
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
        let svg = learning_curve_svg(&recs(&[0.0, 0.0]), "t", true);
        assert!(!svg.contains("NaN"));
        let svg = learning_curve_svg(&recs(&[2.0]), "t", false);
        assert!(!svg.contains("NaN"));
    }
}
