//! SVG scatterplots of the first two coordinates.

use std::fmt::Write;

use ndarray::ArrayView2;
use thiserror::Error;

/// Cluster `l` is drawn in `PALETTE[(l - 1) % 10]`.
pub const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#bcbd22",
    "#17becf", "#393b79",
];
pub const NOISE_COLOUR: &str = "#b0b0b0";

const SIZE: f64 = 480.0;
const MARGIN: f64 = 16.0;
const RADIUS: f64 = 3.0;

#[derive(Debug, Error, PartialEq)]
pub enum PlotError {
    #[error("data have {d} dimension(s); a scatterplot needs at least 2")]
    BadDimension { d: usize },
    #[error("{labels} labels for {points} points")]
    LengthMismatch { points: usize, labels: usize },
}

pub fn colour(label: usize) -> &'static str {
    match label {
        0 => NOISE_COLOUR,
        l => PALETTE[(l - 1) % PALETTE.len()],
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Noise points (label 0) are drawn first so that they never hide cluster
/// members; both axes share one scale.
pub fn scatter_svg(data: ArrayView2<'_, f64>, labels: &[usize], title: &str) -> Result<String, PlotError> {
    if data.ncols() < 2 {
        return Err(PlotError::BadDimension { d: data.ncols() });
    }
    if labels.len() != data.nrows() {
        return Err(PlotError::LengthMismatch {
            points: data.nrows(),
            labels: labels.len(),
        });
    }
    let (x, y) = (data.column(0), data.column(1));
    let bounds = |v: ndarray::ArrayView1<'_, f64>| {
        v.iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &t| (lo.min(t), hi.max(t)))
    };
    let (x_lo, x_hi) = bounds(x);
    let (y_lo, y_hi) = bounds(y);
    let span = (x_hi - x_lo).max(y_hi - y_lo);
    let inner = SIZE - 2.0 * MARGIN;
    let scale = if span > 0.0 && span.is_finite() { inner / span } else { 1.0 };
    let (x_mid, y_mid) = (x_lo / 2.0 + x_hi / 2.0, y_lo / 2.0 + y_hi / 2.0);
    let centre = SIZE / 2.0;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(svg, "<title>{}</title>", escape(title));
    let _ = writeln!(svg, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#);
    let order = (0..labels.len())
        .filter(|&i| labels[i] == 0)
        .chain((0..labels.len()).filter(|&i| labels[i] != 0));
    for i in order {
        let cx = centre + (x[i] - x_mid) * scale;
        let cy = centre - (y[i] - y_mid) * scale;
        let _ = writeln!(
            svg,
            r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{RADIUS}" fill="{}"/>"#,
            colour(labels[i])
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn palette_cycles_and_noise_is_grey() {
        assert_eq!(colour(0), NOISE_COLOUR);
        assert_eq!(colour(1), PALETTE[0]);
        assert_eq!(colour(11), PALETTE[0]);
        assert!(!PALETTE.contains(&NOISE_COLOUR));
    }

    #[test]
    fn equal_axis_scaling() {
        // x spans 10, y spans 1: one unit is the same length on both axes
        let data = array![[0.0, 0.0], [10.0, 1.0]];
        let svg = scatter_svg(data.view(), &[1, 2], "t").unwrap();
        assert!(svg.contains(r#"cx="16.00" cy="262.40""#), "{svg}");
        assert!(svg.contains(r#"cx="464.00" cy="217.60""#), "{svg}");
    }

    #[test]
    fn noise_first_then_clusters() {
        let data = array![[0.0, 0.0], [1.0, 1.0], [2.0, 0.0]];
        let svg = scatter_svg(data.view(), &[1, 0, 2], "a<b").unwrap();
        let fills: Vec<&str> = svg
            .lines()
            .filter(|l| l.starts_with("<circle"))
            .map(|l| l.split("fill=\"").nth(1).unwrap().trim_end_matches("\"/>"))
            .collect();
        assert_eq!(fills, [NOISE_COLOUR, PALETTE[0], PALETTE[1]]);
        assert!(svg.contains("<title>a&lt;b</title>"));
    }

    #[test]
    fn degenerate_inputs() {
        let line = array![[0.0], [1.0]];
        assert_eq!(scatter_svg(line.view(), &[1, 2], ""), Err(PlotError::BadDimension { d: 1 }));
        let same = array![[2.0, 2.0], [2.0, 2.0]];
        let svg = scatter_svg(same.view(), &[1, 1], "").unwrap();
        assert_eq!(svg.matches(r#"cx="240.00" cy="240.00""#).count(), 2);
        assert!(matches!(
            scatter_svg(same.view(), &[1], ""),
            Err(PlotError::LengthMismatch { .. })
        ));
    }
}
