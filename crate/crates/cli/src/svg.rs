//! SVG rendering of objective surfaces.

use std::fmt::Write as _;

use jamloc_core::oracle::BoundingBox;
use jamloc_core::{FieldMap, GridSpec, Point2, Scenario, SolverError};

const PX_PER_M: f64 = 40.0;
const MAX_CELLS: usize = 240;
const LEGEND_W: f64 = 120.0;

/// Box covering every anchor and target, padded like the oracle box.
pub fn default_spec(s: &Scenario, h: f64) -> Result<GridSpec, SolverError> {
    let around = GridSpec::around_targets(s, h)?;
    let (mut lo, mut hi) = (around.bounds.min, around.bounds.max);
    for a in &s.anchors {
        lo = Point2::new(lo.x.min(a.position.x - 0.5), lo.y.min(a.position.y - 0.5));
        hi = Point2::new(hi.x.max(a.position.x + 0.5), hi.y.max(a.position.y + 0.5));
    }
    GridSpec::new(BoundingBox::new(lo, hi), h, true)
}

// viridis-like stops
const STOPS: [(f64, [f64; 3]); 5] = [
    (0.0, [68.0, 1.0, 84.0]),
    (0.25, [59.0, 82.0, 139.0]),
    (0.5, [33.0, 145.0, 140.0]),
    (0.75, [94.0, 201.0, 98.0]),
    (1.0, [253.0, 231.0, 37.0]),
];

fn color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let k = STOPS.iter().position(|s| s.0 >= t).unwrap_or(STOPS.len() - 1).max(1);
    let (t0, c0) = STOPS[k - 1];
    let (t1, c1) = STOPS[k];
    let u = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
    let ch = |i: usize| (c0[i] + (c1[i] - c0[i]) * u).round() as u8;
    format!("#{:02x}{:02x}{:02x}", ch(0), ch(1), ch(2))
}

/// Raster of `map` (downsampled to at most 240 cells a side) with anchors as
/// squares, targets as circles and `z` as a cross.
pub fn render(s: &Scenario, map: &FieldMap, z: Point2) -> String {
    let b = map.spec.bounds;
    let (w, h) = (b.width() * PX_PER_M, b.height() * PX_PER_M);
    let px = |p: Point2| ((p.x - b.min.x) * PX_PER_M, (b.max.y - p.y) * PX_PER_M);
    let (lo, hi) = map.finite_range().unwrap_or((0.0, 1.0));
    let span = if hi > lo { hi - lo } else { 1.0 };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="0 0 {:.2} {:.2}">"#,
        w + LEGEND_W,
        h,
        w + LEGEND_W,
        h
    );
    let stride_x = map.nx.div_ceil(MAX_CELLS).max(1);
    let stride_y = map.ny.div_ceil(MAX_CELLS).max(1);
    let cell = map.spec.resolution * PX_PER_M;
    let _ = writeln!(out, r#"<g shape-rendering="crispEdges">"#);
    for iy in (0..map.ny).step_by(stride_y) {
        for ix in (0..map.nx).step_by(stride_x) {
            let v = map.get(ix, iy);
            let fill = if v.is_finite() { color((v - lo) / span) } else { "#808080".to_string() };
            let (x, y) = px(map.spec.point(ix, iy));
            let (cw, chh) = (cell * stride_x as f64, cell * stride_y as f64);
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                x - cw / 2.0,
                y - chh / 2.0,
                cw,
                chh
            );
        }
    }
    let _ = writeln!(out, "</g>");

    for a in &s.anchors {
        let (x, y) = px(a.position);
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="10" height="10" fill="white" stroke="black"><title>anchor {}</title></rect>"#,
            x - 5.0,
            y - 5.0,
            a.id
        );
    }
    for t in &s.targets {
        let (x, y) = px(t.position);
        let _ = writeln!(
            out,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="5" fill="white" stroke="black"><title>target {}</title></circle>"#,
            t.id
        );
    }
    let (x, y) = px(z);
    let _ = writeln!(
        out,
        r#"<path d="M{:.2} {:.2}L{:.2} {:.2}M{:.2} {:.2}L{:.2} {:.2}" stroke="red" stroke-width="2"><title>argmax {z}</title></path>"#,
        x - 7.0,
        y - 7.0,
        x + 7.0,
        y + 7.0,
        x - 7.0,
        y + 7.0,
        x + 7.0,
        y - 7.0
    );

    let lx = w + 20.0;
    let bar_h = (h - 60.0).max(40.0);
    let _ = writeln!(out, r#"<g font-family="sans-serif" font-size="11">"#);
    for k in 0..50 {
        let t = 1.0 - k as f64 / 49.0;
        let _ = writeln!(
            out,
            r#"<rect x="{lx:.2}" y="{:.2}" width="20" height="{:.2}" fill="{}"/>"#,
            30.0 + bar_h * k as f64 / 50.0,
            bar_h / 50.0 + 0.5,
            color(t)
        );
    }
    let _ = writeln!(out, r#"<text x="{lx:.2}" y="20">max {hi:.4}</text>"#);
    let _ = writeln!(out, r#"<text x="{lx:.2}" y="{:.2}">min {lo:.4}</text>"#, 30.0 + bar_h + 15.0);
    let _ = writeln!(out, "</g>\n</svg>");
    out
}
