//! Level-one boundary polygons and flat SVG renders.

use crate::error::{Error, Result};
use crate::sets::FreeConvexSet;

use super::support::level1_support;

/// Outer polygon of the projection of level one onto real coordinates
/// `(a, b)`: vertices are intersections of consecutive supporting lines.
pub fn plot_level1(set: &FreeConvexSet, coords: (usize, usize), resolution: usize) -> Result<Vec<(f64, f64)>> {
    let dim = set.real_dim();
    let (a, b) = coords;
    if a >= dim || b >= dim || a == b {
        return Err(Error::InvalidArgument(format!("coordinates ({a}, {b}) invalid for real dimension {dim}")));
    }
    let n = resolution.max(3);
    let mut lines = Vec::with_capacity(n);
    for i in 0..n {
        let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
        let mut u = vec![0.0; dim];
        u[a] = t.cos();
        u[b] = t.sin();
        let h = level1_support(set, &u)?;
        if !h.is_finite() {
            return Err(Error::Precondition(format!("level one is unbounded along angle {t:.4}")));
        }
        lines.push((t.cos(), t.sin(), h));
    }
    let mut poly = Vec::with_capacity(n);
    for i in 0..n {
        let (c1, s1, h1) = lines[i];
        let (c2, s2, h2) = lines[(i + 1) % n];
        let det = c1 * s2 - s1 * c2;
        poly.push(((h1 * s2 - h2 * s1) / det, (c1 * h2 - c2 * h1) / det));
    }
    Ok(poly)
}

/// Polygon as a standalone SVG polyline, scaled to fit `size` pixels.
pub fn svg_polygon(poly: &[(f64, f64)], size: f64) -> String {
    let r = poly.iter().map(|&(x, y)| x.abs().max(y.abs())).fold(1e-12, f64::max) * 1.1;
    let k = size / (2.0 * r);
    let pts: Vec<String> = poly
        .iter()
        .chain(poly.first())
        .map(|&(x, y)| format!("{:.4},{:.4}", size / 2.0 + k * x, size / 2.0 - k * y))
        .collect();
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\" data-radius=\"{r}\">\n\
         <line x1=\"0\" y1=\"{h}\" x2=\"{size}\" y2=\"{h}\" stroke=\"#bbb\"/>\n\
         <line x1=\"{h}\" y1=\"0\" x2=\"{h}\" y2=\"{size}\" stroke=\"#bbb\"/>\n\
         <polyline fill=\"none\" stroke=\"black\" points=\"{}\"/>\n</svg>\n",
        pts.join(" "),
        h = size / 2.0
    )
}

/// Reads the polyline vertices back out of [`svg_polygon`] output, in
/// set coordinates.
pub fn parse_svg_polygon(svg: &str) -> Vec<(f64, f64)> {
    let attr = |name: &str| -> Option<&str> {
        let start = svg.find(&format!("{name}=\""))? + name.len() + 2;
        let len = svg[start..].find('"')?;
        Some(&svg[start..start + len])
    };
    let (Some(size), Some(r), Some(points)) = (attr("width"), attr("data-radius"), attr("points")) else {
        return Vec::new();
    };
    let (Ok(size), Ok(r)) = (size.parse::<f64>(), r.parse::<f64>()) else { return Vec::new() };
    let k = size / (2.0 * r);
    points
        .split_whitespace()
        .filter_map(|p| {
            let (x, y) = p.split_once(',')?;
            Some(((x.parse::<f64>().ok()? - size / 2.0) / k, (size / 2.0 - y.parse::<f64>().ok()?) / k))
        })
        .collect()
}
