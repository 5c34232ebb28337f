//! Convex quadrilateral primitives.
//!
//! Every [`Quad`] is stored in canonical form: counter-clockwise (positive
//! shoelace area in a y-up frame) with the lexicographically smallest vertex
//! first. Intersections are computed by clipping one convex polygon against
//! the half-planes of the other, so all results stay convex.

use std::fmt;
use std::ops;

use thiserror::Error;

/// Quadrilaterals with an absolute area below this (px²) are rejected.
pub const MIN_AREA: f64 = 1e-9;

/// Relative tolerance used when deciding whether three vertices are collinear.
const COLLINEAR_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("vertex {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("vertices {0} and {1} coincide")]
    DuplicateVertex(usize, usize),
    #[error("quadrilateral is not convex or is self-intersecting")]
    NonConvex,
    #[error("degenerate quadrilateral (area {0:e} px²)")]
    Degenerate(f64),
    #[error("invalid expansion factor {0}")]
    InvalidFactor(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn scale(self, k: f64) -> Point2 {
        Point2::new(self.x * k, self.y * k)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    /// Midpoint of `self` and `other`.
    pub fn midpoint(self, other: Point2) -> Point2 {
        Point2::new((self.x + other.x) / 2.0, (self.y + other.y) / 2.0)
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl ops::Add for Point2 {
    type Output = Point2;
    fn add(self, other: Point2) -> Point2 {
        Point2::new(self.x + other.x, self.y + other.y)
    }
}

impl ops::Sub for Point2 {
    type Output = Point2;
    fn sub(self, other: Point2) -> Point2 {
        Point2::new(self.x - other.x, self.y - other.y)
    }
}

impl From<[f64; 2]> for Point2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Point2::new(x, y)
    }
}

/// z-component of `(b - a) × (c - a)`; positive when `a → b → c` turns left.
#[inline]
fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Signed shoelace area; positive for counter-clockwise vertex order.
pub fn signed_area(poly: &[Point2]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for (i, p) in poly.iter().enumerate() {
        let q = poly[(i + 1) % poly.len()];
        acc += p.x * q.y - q.x * p.y;
    }
    acc / 2.0
}

/// A convex quadrilateral in canonical form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    vertices: [Point2; 4],
}

impl Quad {
    /// Validates four raw points and brings them into canonical form.
    ///
    /// Accepts either winding. Rejects non-finite, duplicated, non-convex,
    /// self-intersecting and zero-area input. Collinear triples are tolerated
    /// as long as the remaining shape has positive area.
    pub fn normalize(raw: [Point2; 4]) -> Result<Quad, GeometryError> {
        for (i, p) in raw.iter().enumerate() {
            if !p.is_finite() {
                return Err(GeometryError::NonFinite(i));
            }
        }
        for i in 0..4 {
            for j in (i + 1)..4 {
                if raw[i] == raw[j] {
                    return Err(GeometryError::DuplicateVertex(i, j));
                }
            }
        }

        let scale = (0..4)
            .map(|i| raw[i].distance(raw[(i + 1) % 4]))
            .fold(0.0_f64, f64::max);
        let tol = COLLINEAR_EPS * scale * scale;
        let (mut left, mut right) = (false, false);
        for i in 0..4 {
            let turn = orient(raw[i], raw[(i + 1) % 4], raw[(i + 2) % 4]);
            if turn > tol {
                left = true;
            } else if turn < -tol {
                right = true;
            }
        }
        if left && right {
            return Err(GeometryError::NonConvex);
        }

        let area = signed_area(&raw);
        if area.abs() < MIN_AREA {
            return Err(GeometryError::Degenerate(area.abs()));
        }

        let mut v = raw;
        if area < 0.0 {
            v.reverse();
        }
        let first = (0..4)
            .min_by(|&i, &j| {
                v[i].x
                    .total_cmp(&v[j].x)
                    .then_with(|| v[i].y.total_cmp(&v[j].y))
            })
            .unwrap_or(0);
        v.rotate_left(first);
        Ok(Quad { vertices: v })
    }

    /// Convenience constructor from `[[x, y]; 4]`.
    pub fn from_xy(raw: [[f64; 2]; 4]) -> Result<Quad, GeometryError> {
        Quad::normalize(raw.map(Point2::from))
    }

    /// Axis-aligned rectangle spanning `(x0, y0)`–`(x1, y1)`.
    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Quad, GeometryError> {
        Quad::from_xy([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    }

    pub fn vertices(&self) -> &[Point2; 4] {
        &self.vertices
    }

    pub fn to_xy(&self) -> [[f64; 2]; 4] {
        self.vertices.map(|p| [p.x, p.y])
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    /// Area-weighted polygon centroid.
    pub fn centroid(&self) -> Point2 {
        polygon_centroid(&self.vertices)
    }

    /// Length of the shortest of the four edges.
    pub fn short_side(&self) -> f64 {
        self.edges()
            .map(|(a, b)| a.distance(b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Directed edges in counter-clockwise order.
    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        (0..4).map(move |i| (self.vertices[i], self.vertices[(i + 1) % 4]))
    }

    /// Pushes every vertex away from the centroid, along the centroid→vertex
    /// ray, by `factor × short_side`.
    pub fn expand(&self, factor: f64) -> Result<Quad, GeometryError> {
        if !factor.is_finite() || factor < 0.0 {
            return Err(GeometryError::InvalidFactor(factor));
        }
        if factor == 0.0 {
            return Ok(*self);
        }
        let c = self.centroid();
        let step = factor * self.short_side();
        let moved = self.vertices.map(|v| {
            let ray = v - c;
            v + ray.scale(step / ray.norm())
        });
        Quad::normalize(moved)
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Quad {
        Quad {
            vertices: self.vertices.map(|p| Point2::new(p.x + dx, p.y + dy)),
        }
    }

    /// `(min_x, min_y, max_x, max_y)`.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        bounds_of(&self.vertices)
    }

    /// Smallest axis-aligned rectangle covering every quad in `quads`.
    /// Returns `None` for an empty iterator.
    pub fn enclosing<'a, I>(quads: I) -> Option<Quad>
    where
        I: IntoIterator<Item = &'a Quad>,
    {
        let mut acc: Option<(f64, f64, f64, f64)> = None;
        for q in quads {
            let (x0, y0, x1, y1) = q.bounds();
            acc = Some(match acc {
                None => (x0, y0, x1, y1),
                Some((a, b, c, d)) => (a.min(x0), b.min(y0), c.max(x1), d.max(y1)),
            });
        }
        let (x0, y0, x1, y1) = acc?;
        Quad::rect(x0, y0, x1, y1).ok()
    }
}

fn bounds_of(points: &[Point2]) -> (f64, f64, f64, f64) {
    points.iter().fold(
        (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        |(x0, y0, x1, y1), p| (x0.min(p.x), y0.min(p.y), x1.max(p.x), y1.max(p.y)),
    )
}

fn polygon_centroid(poly: &[Point2]) -> Point2 {
    let mut a = 0.0;
    let (mut cx, mut cy) = (0.0, 0.0);
    // Shift to the first vertex for better conditioning on large coordinates.
    let o = poly[0];
    for i in 0..poly.len() {
        let p = poly[i] - o;
        let q = poly[(i + 1) % poly.len()] - o;
        let w = p.x * q.y - q.x * p.y;
        a += w;
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    Point2::new(o.x + cx / (3.0 * a), o.y + cy / (3.0 * a))
}

/// Convex polygon with 0 to 8 vertices, counter-clockwise. Empty when the
/// operands of an intersection do not overlap with positive area.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvexPolygon {
    vertices: Vec<Point2>,
}

impl ConvexPolygon {
    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices).max(0.0)
    }
}

/// Clips `subject` against the left half-plane of the directed edge `a → b`.
fn clip_halfplane(subject: &[Point2], a: Point2, b: Point2, out: &mut Vec<Point2>) {
    out.clear();
    let n = subject.len();
    for i in 0..n {
        let cur = subject[i];
        let nxt = subject[(i + 1) % n];
        let dc = orient(a, b, cur);
        let dn = orient(a, b, nxt);
        if dc >= 0.0 {
            out.push(cur);
        }
        if (dc >= 0.0) != (dn >= 0.0) {
            let t = dc / (dc - dn);
            out.push(Point2::new(cur.x + t * (nxt.x - cur.x), cur.y + t * (nxt.y - cur.y)));
        }
    }
}

/// Intersection of two canonical quadrilaterals (Sutherland–Hodgman).
pub fn intersect_convex(a: &Quad, b: &Quad) -> ConvexPolygon {
    let (ax0, ay0, ax1, ay1) = a.bounds();
    let (bx0, by0, bx1, by1) = b.bounds();
    if ax1 <= bx0 || bx1 <= ax0 || ay1 <= by0 || by1 <= ay0 {
        return ConvexPolygon::default();
    }

    let mut poly: Vec<Point2> = a.vertices.to_vec();
    let mut scratch = Vec::with_capacity(8);
    for (p, q) in b.edges() {
        clip_halfplane(&poly, p, q, &mut scratch);
        std::mem::swap(&mut poly, &mut scratch);
        if poly.is_empty() {
            return ConvexPolygon::default();
        }
    }

    poly.dedup();
    while poly.len() > 1 && poly.first() == poly.last() {
        poly.pop();
    }
    if poly.len() < 3 || signed_area(&poly) <= 0.0 {
        return ConvexPolygon::default();
    }
    ConvexPolygon { vertices: poly }
}

/// Area intersection over union of two quadrilaterals, in `[0, 1]`.
pub fn iou_spatial(a: &Quad, b: &Quad) -> f64 {
    if a == b {
        return 1.0;
    }
    let inter = intersect_convex(a, b).area();
    if inter <= 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

/// Closed-set overlap test by separating axes: shapes that merely touch
/// count as overlapping.
pub fn quads_touch(a: &Quad, b: &Quad) -> bool {
    fn separated_by_edges_of(p: &Quad, q: &Quad) -> bool {
        p.edges().any(|(s, e)| {
            // Outward normal of a CCW edge is on the right.
            let nx = e.y - s.y;
            let ny = s.x - e.x;
            let project = |v: &Point2| nx * v.x + ny * v.y;
            let p_max = p.vertices.iter().map(project).fold(f64::NEG_INFINITY, f64::max);
            let q_min = q.vertices.iter().map(project).fold(f64::INFINITY, f64::min);
            q_min > p_max
        })
    }
    !(separated_by_edges_of(a, b) || separated_by_edges_of(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit() -> Quad {
        Quad::rect(0.0, 0.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn area_examples() {
        assert_eq!(unit().area(), 1.0);
        assert_eq!(Quad::rect(0.0, 0.0, 2.0, 2.0).unwrap().area(), 4.0);
        // Shoelace by hand: 0 + 2 + 3 + 0 - (0 + 0 + 0 + 0) over 2 = 2.5.
        let q = Quad::from_xy([[0.0, 0.0], [2.0, 0.0], [3.0, 1.0], [0.0, 1.0]]).unwrap();
        assert_relative_eq!(q.area(), 2.5);
    }

    #[test]
    fn degenerate_rejected() {
        let err = Quad::from_xy([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]]).unwrap_err();
        assert!(matches!(err, GeometryError::Degenerate(_)));
        let tiny = 1e-6;
        assert!(matches!(
            Quad::rect(0.0, 0.0, tiny, tiny),
            Err(GeometryError::Degenerate(_))
        ));
    }

    #[test]
    fn normalize_flips_clockwise() {
        let cw = Quad::from_xy([[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]]).unwrap();
        assert_eq!(cw, unit());
        assert_eq!(cw.to_xy(), [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
    }

    #[test]
    fn normalize_idempotent() {
        let q = unit();
        assert_eq!(Quad::normalize(*q.vertices()).unwrap(), q);
    }

    #[test]
    fn bow_tie_rejected() {
        let err = Quad::from_xy([[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]).unwrap_err();
        assert_eq!(err, GeometryError::NonConvex);
    }

    #[test]
    fn reflex_and_duplicate_rejected() {
        let dart = Quad::from_xy([[0.0, 0.0], [4.0, 0.0], [1.0, 1.0], [0.0, 4.0]]);
        assert_eq!(dart.unwrap_err(), GeometryError::NonConvex);
        let dup = Quad::from_xy([[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(dup.unwrap_err(), GeometryError::DuplicateVertex(1, 2));
        let nan = Quad::from_xy([[0.0, f64::NAN], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        assert_eq!(nan.unwrap_err(), GeometryError::NonFinite(0));
    }

    #[test]
    fn intersect_examples() {
        let a = unit();
        assert_relative_eq!(intersect_convex(&a, &a).area(), 1.0);
        let far = Quad::rect(5.0, 5.0, 6.0, 6.0).unwrap();
        assert!(intersect_convex(&a, &far).is_empty());
        let shifted = Quad::rect(0.5, 0.0, 1.5, 1.0).unwrap();
        let inter = intersect_convex(&a, &shifted);
        assert_relative_eq!(inter.area(), 0.5, epsilon = 1e-12);
        assert_eq!(inter.vertices().len(), 4);
    }

    #[test]
    fn iou_examples() {
        let a = unit();
        assert_eq!(iou_spatial(&a, &a), 1.0);
        assert_eq!(iou_spatial(&a, &Quad::rect(3.0, 0.0, 4.0, 1.0).unwrap()), 0.0);
        let b = Quad::rect(0.5, 0.0, 1.5, 1.0).unwrap();
        assert_relative_eq!(iou_spatial(&a, &b), 1.0 / 3.0, epsilon = 1e-12);
        // Edge-sharing squares have zero-area overlap.
        assert_eq!(iou_spatial(&a, &Quad::rect(1.0, 0.0, 2.0, 1.0).unwrap()), 0.0);
    }

    #[test]
    fn short_side_examples() {
        assert_eq!(Quad::rect(0.0, 0.0, 100.0, 20.0).unwrap().short_side(), 20.0);
        assert_eq!(unit().short_side(), 1.0);
        let q = Quad::from_xy([[0.0, 0.0], [10.0, 0.0], [10.0, 3.0], [1.0, 4.0]]).unwrap();
        // Edge lengths: 10, 3, sqrt(81 + 1), sqrt(1 + 16).
        let expected = [10.0_f64, 3.0, 82.0_f64.sqrt(), 17.0_f64.sqrt()]
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        assert_eq!(q.short_side(), expected);
    }

    #[test]
    fn expand_examples() {
        let q = unit();
        assert_eq!(q.expand(0.0).unwrap(), q);

        let e = q.expand(0.1).unwrap();
        let d = 0.1 / 2.0_f64.sqrt();
        let expected = [[-d, -d], [1.0 + d, -d], [1.0 + d, 1.0 + d], [-d, 1.0 + d]];
        for (got, want) in e.to_xy().iter().zip(expected.iter()) {
            assert_relative_eq!(got[0], want[0], epsilon = 1e-12);
            assert_relative_eq!(got[1], want[1], epsilon = 1e-12);
        }
        assert!(e.area() > q.area());
        assert_relative_eq!(intersect_convex(&e, &q).area(), q.area(), epsilon = 1e-12);

        assert!(matches!(q.expand(-0.5), Err(GeometryError::InvalidFactor(_))));
    }

    #[test]
    fn centroid_examples() {
        assert_eq!(unit().centroid(), Point2::new(0.5, 0.5));
        let t = unit().translate(3.0, -2.0).centroid();
        assert_relative_eq!(t.x, 3.5);
        assert_relative_eq!(t.y, -1.5);

        // Triangulation oracle: rectangle [0,2]x[0,1] (area 2, centroid (1, .5))
        // plus triangle (2,0)(3,1)(2,1) (area .5, centroid (7/3, 2/3)).
        let q = Quad::from_xy([[0.0, 0.0], [2.0, 0.0], [3.0, 1.0], [0.0, 1.0]]).unwrap();
        let cx = (2.0 * 1.0 + 0.5 * 7.0 / 3.0) / 2.5;
        let cy = (2.0 * 0.5 + 0.5 * 2.0 / 3.0) / 2.5;
        let c = q.centroid();
        assert_relative_eq!(c.x, cx, epsilon = 1e-12);
        assert_relative_eq!(c.y, cy, epsilon = 1e-12);
    }

    #[test]
    fn touch_is_closed() {
        let a = unit();
        assert!(quads_touch(&a, &Quad::rect(1.0, 0.0, 2.0, 1.0).unwrap()));
        assert!(quads_touch(&a, &Quad::rect(0.5, 0.5, 2.0, 2.0).unwrap()));
        assert!(!quads_touch(&a, &Quad::rect(1.01, 0.0, 2.0, 1.0).unwrap()));
        // Diamond whose bounding box overlaps the square but the shapes don't.
        let diamond =
            Quad::from_xy([[1.6, 1.0], [2.1, 1.5], [1.6, 2.0], [1.1, 1.5]]).unwrap();
        assert!(!quads_touch(&a, &diamond));
    }

    #[test]
    fn enclosing_box() {
        let a = unit();
        let b = Quad::rect(2.0, -1.0, 3.0, 0.5).unwrap();
        let e = Quad::enclosing([&a, &b]).unwrap();
        assert_eq!(e.bounds(), (0.0, -1.0, 3.0, 1.0));
        assert!(Quad::enclosing(std::iter::empty()).is_none());
    }
}
