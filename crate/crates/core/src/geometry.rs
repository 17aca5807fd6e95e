//! Planar primitives: points, convex hulls, projection onto a hull,
//! triangle membership and circle-circle intersection.
//!
//! All containment and on-circle tests use the absolute tolerance
//! [`TAU_GEO`]. Multivalued results are ordered by `y` descending, then `x`
//! descending, so callers get reproducible output.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;

/// Absolute tolerance (meters) for orientation, containment and on-circle tests.
pub const TAU_GEO: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point2) -> f64 {
        distance(self, other)
    }

    pub fn from_polar(center: Point2, radius: f64, angle: f64) -> Point2 {
        let (s, c) = angle.sin_cos();
        Point2::new(center.x + radius * c, center.y + radius * s)
    }

    /// Rotate about `center` by `angle` radians (counter-clockwise).
    pub fn rotate_about(self, center: Point2, angle: f64) -> Point2 {
        let (s, c) = angle.sin_cos();
        let v = self - center;
        center + Point2::new(c * v.x - s * v.y, s * v.x + c * v.y)
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.4}, {:.4})", self.x, self.y)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// Euclidean distance.
pub fn distance(p: Point2, q: Point2) -> f64 {
    (p.x - q.x).hypot(p.y - q.y)
}

/// Twice the signed area of triangle `o, a, b`; positive when counter-clockwise.
pub fn orient(o: Point2, a: Point2, b: Point2) -> f64 {
    (a - o).cross(b - o)
}

/// Reference ordering for multivalued results: larger `y` first, then larger `x`.
pub fn canonical_order(a: &Point2, b: &Point2) -> Ordering {
    b.y.total_cmp(&a.y).then(b.x.total_cmp(&a.x))
}

/// Closest point of segment `a-b` to `p`.
pub fn project_onto_segment(p: Point2, a: Point2, b: Point2) -> Point2 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 <= TAU_GEO * TAU_GEO {
        return a;
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    a + ab * t
}

/// A convex polygon with counter-clockwise vertices and no three consecutive
/// collinear vertices. One vertex is a point hull, two vertices a segment hull.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Point2>,
}

impl ConvexPolygon {
    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Edges as vertex pairs; a segment hull has one edge, a point hull none.
    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        let count = match n {
            0 | 1 => 0,
            2 => 1,
            _ => n,
        };
        (0..count).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Closed-set membership with `tol` slack.
    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        match self.vertices.len() {
            0 => false,
            1 => distance(p, self.vertices[0]) <= tol,
            2 => distance(p, project_onto_segment(p, self.vertices[0], self.vertices[1])) <= tol,
            _ => self.edges().all(|(a, b)| {
                let len = distance(a, b);
                orient(a, b, p) / len >= -tol
            }),
        }
    }

    /// Unique closest point of the hull (as a closed convex set) to `z`.
    pub fn project(&self, z: Point2) -> Point2 {
        project_onto_hull(z, self)
    }
}

/// Andrew's monotone chain. Duplicates and collinear boundary points are
/// dropped; collinear input yields a two-vertex segment hull.
pub fn convex_hull(points: &[Point2]) -> Result<ConvexPolygon, GeometryError> {
    if points.is_empty() {
        return Err(GeometryError::EmptyInput);
    }
    if let Some(p) = points.iter().find(|p| !p.is_finite()) {
        return Err(GeometryError::NonFinite(*p));
    }
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| distance(*a, *b) <= TAU_GEO);
    if pts.len() <= 2 {
        return Ok(ConvexPolygon { vertices: pts });
    }

    let mut hull: Vec<Point2> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && turns_left(hull[hull.len() - 2], hull[hull.len() - 1], p) {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && turns_left(hull[hull.len() - 2], hull[hull.len() - 1], p) {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();

    // All input collinear: the chain degenerates to the two extreme points.
    if hull.len() < 3 {
        hull.truncate(2);
    }
    Ok(ConvexPolygon { vertices: hull })
}

// Pops unless `o -> a -> p` is a strict left turn beyond tolerance.
fn turns_left(o: Point2, a: Point2, p: Point2) -> bool {
    let scale = distance(o, p).max(TAU_GEO);
    orient(o, a, p) / scale <= TAU_GEO
}

pub fn project_onto_hull(z: Point2, hull: &ConvexPolygon) -> Point2 {
    let v = hull.vertices();
    match v.len() {
        0 => z,
        1 => v[0],
        2 => project_onto_segment(z, v[0], v[1]),
        _ => {
            if hull.contains(z, 0.0) {
                return z;
            }
            hull.edges()
                .map(|(a, b)| project_onto_segment(z, a, b))
                .min_by(|p, q| distance(z, *p).total_cmp(&distance(z, *q)))
                .unwrap_or(z)
        }
    }
}

/// Corner label of a triangle passed as `(a, b, c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Corner {
    A,
    B,
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriangleLocation {
    Interior,
    /// On the open edge between two corners.
    Edge(Corner, Corner),
    Vertex(Corner),
    Exterior,
}

impl TriangleLocation {
    pub fn is_boundary(&self) -> bool {
        matches!(self, TriangleLocation::Edge(..) | TriangleLocation::Vertex(_))
    }
}

/// Classify `z` against triangle `abc` using orientation signs with tolerance
/// [`TAU_GEO`]. A collinear triangle is treated as the segment between its two
/// extreme corners, so it only ever reports boundary or exterior.
pub fn locate_in_triangle(z: Point2, a: Point2, b: Point2, c: Point2) -> TriangleLocation {
    let corners = [(Corner::A, a), (Corner::B, b), (Corner::C, c)];
    for (label, p) in corners {
        if distance(z, p) <= TAU_GEO {
            return TriangleLocation::Vertex(label);
        }
    }

    let area2 = orient(a, b, c);
    let longest = distance(a, b).max(distance(b, c)).max(distance(a, c));
    if area2.abs() <= TAU_GEO * longest {
        // Degenerate: pick the two corners farthest apart as the segment.
        let pairs = [(0usize, 1usize), (1, 2), (0, 2)];
        let (i, j) = pairs
            .into_iter()
            .max_by(|&(i, j), &(k, l)| {
                distance(corners[i].1, corners[j].1).total_cmp(&distance(corners[k].1, corners[l].1))
            })
            .expect("three pairs");
        let (pi, pj) = (corners[i].1, corners[j].1);
        return if distance(z, project_onto_segment(z, pi, pj)) <= TAU_GEO {
            TriangleLocation::Edge(corners[i].0, corners[j].0)
        } else {
            TriangleLocation::Exterior
        };
    }

    let sign = area2.signum();
    let edges = [(0usize, 1usize), (1, 2), (2, 0)];
    let mut on_edge = None;
    for (i, j) in edges {
        let (p, q) = (corners[i].1, corners[j].1);
        let s = sign * orient(p, q, z) / distance(p, q);
        if s < -TAU_GEO {
            return TriangleLocation::Exterior;
        }
        if s <= TAU_GEO {
            on_edge = Some((corners[i].0, corners[j].0));
        }
    }
    match on_edge {
        Some((p, q)) => TriangleLocation::Edge(p, q),
        None => TriangleLocation::Interior,
    }
}

/// Intersection points of two circles, ordered by [`canonical_order`].
/// External or internal tangency (within [`TAU_GEO`]) yields one point.
pub fn circle_circle_intersection(
    c1: Point2,
    r1: f64,
    c2: Point2,
    r2: f64,
) -> Result<Vec<Point2>, GeometryError> {
    if r1 < 0.0 || r2 < 0.0 || !r1.is_finite() || !r2.is_finite() {
        return Err(GeometryError::InvalidRadius(r1.min(r2)));
    }
    let d = distance(c1, c2);
    if d <= TAU_GEO {
        return Err(GeometryError::ConcentricCircles);
    }
    if d > r1 + r2 + TAU_GEO || d < (r1 - r2).abs() - TAU_GEO {
        return Ok(Vec::new());
    }
    let u = (c2 - c1) * (1.0 / d);
    let a = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
    let h2 = r1 * r1 - a * a;
    let base = c1 + u * a;
    let tangent = (d - (r1 + r2)).abs() <= TAU_GEO || (d - (r1 - r2).abs()).abs() <= TAU_GEO;
    if tangent || h2 <= 0.0 {
        return Ok(vec![base]);
    }
    let h = h2.sqrt();
    let perp = Point2::new(-u.y, u.x);
    let mut out = vec![base + perp * h, base - perp * h];
    out.sort_by(canonical_order);
    Ok(out)
}
