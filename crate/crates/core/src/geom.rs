//! Planar points and the handful of segment predicates the rest of the crate needs.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A point (or vector) in the plane. Serialized as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Point {
    fn from(a: [f64; 2]) -> Self {
        Point { x: a[0], y: a[1] }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    pub fn lerp(self, o: Point, t: f64) -> Point {
        Point::new(self.x + t * (o.x - self.x), self.y + t * (o.y - self.y))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Twice the signed area of the triangle `abc` (positive when counter-clockwise).
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

/// Outcome of intersecting two closed segments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Crossing {
    /// The segments do not meet.
    None,
    /// A transversal crossing strictly inside both segments, at parameters `(t, u)`.
    Proper(f64, f64),
    /// The segments touch at an endpoint, overlap, or cross within `eps` of an endpoint.
    Degenerate,
}

/// Classifies the intersection of `[p, q]` with `[a, b]`. Any contact that is within `eps`
/// (absolute distance) of a vertex, or any near-collinear overlap, reports
/// [`Crossing::Degenerate`] so callers can perturb and retry.
pub fn segment_crossing(p: Point, q: Point, a: Point, b: Point, eps: f64) -> Crossing {
    let r = q - p;
    let s = b - a;
    let denom = r.cross(s);
    let lr = r.norm();
    let ls = s.norm();
    if lr == 0.0 || ls == 0.0 {
        return if point_segment_distance(p, a, b) <= eps || point_segment_distance(a, p, q) <= eps {
            Crossing::Degenerate
        } else {
            Crossing::None
        };
    }
    let ap = a - p;
    if denom.abs() <= 1e-14 * lr * ls {
        // parallel
        let dist = ap.cross(r).abs() / lr;
        if dist > eps {
            return Crossing::None;
        }
        let t0 = ap.dot(r) / (lr * lr);
        let t1 = (b - p).dot(r) / (lr * lr);
        let (lo, hi) = if t0 < t1 { (t0, t1) } else { (t1, t0) };
        let pad = eps / lr;
        return if hi < -pad || lo > 1.0 + pad {
            Crossing::None
        } else {
            Crossing::Degenerate
        };
    }
    let t = ap.cross(s) / denom;
    let u = ap.cross(r) / denom;
    let pt = eps / lr;
    let pu = eps / ls;
    if t < -pt || t > 1.0 + pt || u < -pu || u > 1.0 + pu {
        return Crossing::None;
    }
    if t <= pt || t >= 1.0 - pt || u <= pu || u >= 1.0 - pu {
        return Crossing::Degenerate;
    }
    Crossing::Proper(t, u)
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let d = b - a;
    let l2 = d.dot(d);
    if l2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(d) / l2).clamp(0.0, 1.0);
    p.dist(a.lerp(b, t))
}

/// Shoelace signed area of a closed polygon given without (or with) its closing vertex.
pub fn signed_area(poly: &[Point]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        acc += a.cross(b);
    }
    0.5 * acc
}

/// Total length of a union of closed intervals, merging overlaps.
pub fn interval_union_length(intervals: &mut [(f64, f64)]) -> f64 {
    if intervals.is_empty() {
        return 0.0;
    }
    for iv in intervals.iter_mut() {
        if iv.0 > iv.1 {
            *iv = (iv.1, iv.0);
        }
    }
    intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut total = 0.0;
    let (mut lo, mut hi) = intervals[0];
    for &(a, b) in intervals.iter().skip(1) {
        if a > hi {
            total += hi - lo;
            lo = a;
            hi = b;
        } else if b > hi {
            hi = b;
        }
    }
    total + (hi - lo)
}

/// Even–odd point-in-polygon test for a closed polyline (closing vertex optional).
pub fn point_in_polygon(p: Point, poly: &[Point]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Pairwise summation in a fixed tree shape, so the result does not depend on how the
/// terms were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n if n <= 8 => xs.iter().sum(),
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proper_crossing_of_diagonals() {
        let c = segment_crossing(
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
            Point::new(1.0, 0.0),
            1e-12,
        );
        match c {
            Crossing::Proper(t, u) => {
                assert!((t - 0.5).abs() < 1e-15 && (u - 0.5).abs() < 1e-15);
            }
            other => panic!("expected proper crossing, got {other:?}"),
        }
    }

    #[test]
    fn endpoint_touch_is_degenerate() {
        let c = segment_crossing(
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, -1.0),
            Point::new(1.0, 1.0),
            1e-12,
        );
        assert_eq!(c, Crossing::Degenerate);
    }

    #[test]
    fn collinear_overlap_is_degenerate_disjoint_is_none() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(2.0, 0.0);
        assert_eq!(
            segment_crossing(a, b, Point::new(1.0, 0.0), Point::new(3.0, 0.0), 1e-12),
            Crossing::Degenerate
        );
        assert_eq!(
            segment_crossing(a, b, Point::new(0.0, 1.0), Point::new(2.0, 1.0), 1e-12),
            Crossing::None
        );
    }

    #[test]
    fn interval_union_merges() {
        let mut iv = vec![(0.0, 1.0), (0.5, 2.0), (3.0, 4.0), (4.0, 3.5)];
        assert_eq!(interval_union_length(&mut iv), 3.0);
    }

    #[test]
    fn unit_square_area_and_containment() {
        let sq = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        assert_eq!(signed_area(&sq), 1.0);
        assert!(point_in_polygon(Point::new(0.5, 0.5), &sq));
        assert!(!point_in_polygon(Point::new(1.5, 0.5), &sq));
    }
}
