//! Planar geometry primitives: points, segments, axis-aligned boxes and the
//! closed-segment intersection test the collision pipeline is built on.

use serde::{Deserialize, Serialize};

/// Comparison slack for the degenerate (parallel / collinear) branches of the
/// intersection test. Coordinates are floor-local meters, so 1e-12 is far
/// below any physical feature size.
const GEOM_EPS: f64 = 1e-12;

/// A point in the floor-local planar frame, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: Point2) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

impl std::ops::Sub for Point2 {
    type Output = Vec2;
    fn sub(self, rhs: Point2) -> Vec2 {
        Vec2 {
            x: self.x - rhs.x,
            y: self.y - rhs.y,
        }
    }
}

impl std::ops::Add<Vec2> for Point2 {
    type Output = Point2;
    fn add(self, rhs: Vec2) -> Point2 {
        Point2 {
            x: self.x + rhs.x,
            y: self.y + rhs.y,
        }
    }
}

/// A displacement in the plane, meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(self, k: f64) -> Vec2 {
        Vec2 {
            x: self.x * k,
            y: self.y * k,
        }
    }

    /// Unit vector; the zero vector is the caller's bug.
    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        debug_assert!(n > 0.0);
        self.scale(1.0 / n)
    }

    /// Counter-clockwise perpendicular.
    pub fn perp(self) -> Vec2 {
        Vec2 {
            x: -self.y,
            y: self.x,
        }
    }
}

/// A directed closed segment from `a` to `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point2,
    pub b: Point2,
}

impl Segment {
    pub fn new(a: Point2, b: Point2) -> Self {
        Segment { a, b }
    }

    pub fn direction(&self) -> Vec2 {
        self.b - self.a
    }

    pub fn length(&self) -> f64 {
        self.direction().norm()
    }

    pub fn point_at(&self, t: f64) -> Point2 {
        self.a + self.direction().scale(t)
    }

    pub fn bbox(&self) -> AxisBox {
        AxisBox {
            min: Point2::new(self.a.x.min(self.b.x), self.a.y.min(self.b.y)),
            max: Point2::new(self.a.x.max(self.b.x), self.a.y.max(self.b.y)),
        }
    }
}

/// Tight axis-aligned box, `min.x <= max.x` and `min.y <= max.y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub min: Point2,
    pub max: Point2,
}

impl AxisBox {
    pub fn new(min: Point2, max: Point2) -> Self {
        debug_assert!(min.x <= max.x && min.y <= max.y);
        AxisBox { min, max }
    }

    pub fn of_points(points: impl IntoIterator<Item = Point2>) -> Option<AxisBox> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut bb = AxisBox {
            min: first,
            max: first,
        };
        for p in it {
            bb.min.x = bb.min.x.min(p.x);
            bb.min.y = bb.min.y.min(p.y);
            bb.max.x = bb.max.x.max(p.x);
            bb.max.y = bb.max.y.max(p.y);
        }
        Some(bb)
    }

    /// Closed-interval overlap test; touching boxes count as overlapping, so
    /// touching segments are never pruned away.
    pub fn overlaps(&self, other: &AxisBox) -> bool {
        self.min.x <= other.max.x
            && other.min.x <= self.max.x
            && self.min.y <= other.max.y
            && other.min.y <= self.max.y
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn union(&self, other: &AxisBox) -> AxisBox {
        AxisBox {
            min: Point2::new(self.min.x.min(other.min.x), self.min.y.min(other.min.y)),
            max: Point2::new(self.max.x.max(other.max.x), self.max.y.max(other.max.y)),
        }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point2 {
        Point2::new(
            0.5 * (self.min.x + self.max.x),
            0.5 * (self.min.y + self.max.y),
        )
    }

    /// Grows the box by `m` on every side.
    pub fn inflate(&self, m: f64) -> AxisBox {
        AxisBox {
            min: Point2::new(self.min.x - m, self.min.y - m),
            max: Point2::new(self.max.x + m, self.max.y + m),
        }
    }
}

/// Intersection of two closed segments.
///
/// Both segments must have positive length. Returns the crossing point when
/// they intersect; for collinear overlap the returned point is the overlap
/// point closest to `p.a`, so a sliding displacement is stopped where it
/// first touches the obstacle.
pub fn segment_intersect(p: &Segment, w: &Segment) -> Option<Point2> {
    let d1 = p.direction();
    let d2 = w.direction();
    let offset = w.a - p.a;
    let denom = d1.cross(d2);

    if denom.abs() > GEOM_EPS {
        let t = offset.cross(d2) / denom;
        let u = offset.cross(d1) / denom;
        if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
            return Some(p.point_at(t));
        }
        return None;
    }

    // Parallel. Non-collinear parallels cannot touch.
    if offset.cross(d1).abs() > GEOM_EPS * (1.0 + d1.norm() * offset.norm()) {
        return None;
    }

    // Collinear: project w onto p's parameter axis and intersect ranges.
    let len_sq = d1.dot(d1);
    let ta = (w.a - p.a).dot(d1) / len_sq;
    let tb = (w.b - p.a).dot(d1) / len_sq;
    let (lo, hi) = if ta <= tb { (ta, tb) } else { (tb, ta) };
    let start = lo.max(0.0);
    let end = hi.min(1.0);
    if start > end {
        return None;
    }
    Some(p.point_at(start))
}

/// Parametric position of the first contact along `p`, if any.
///
/// Same hit decisions as [`segment_intersect`]; used where the caller needs
/// to order hits along a displacement.
pub fn segment_intersect_param(p: &Segment, w: &Segment) -> Option<f64> {
    let d1 = p.direction();
    let d2 = w.direction();
    let offset = w.a - p.a;
    let denom = d1.cross(d2);

    if denom.abs() > GEOM_EPS {
        let t = offset.cross(d2) / denom;
        let u = offset.cross(d1) / denom;
        if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
            return Some(t);
        }
        return None;
    }
    if offset.cross(d1).abs() > GEOM_EPS * (1.0 + d1.norm() * offset.norm()) {
        return None;
    }
    let len_sq = d1.dot(d1);
    let ta = (w.a - p.a).dot(d1) / len_sq;
    let tb = (w.b - p.a).dot(d1) / len_sq;
    let (lo, hi) = if ta <= tb { (ta, tb) } else { (tb, ta) };
    let start = lo.max(0.0);
    if start > hi.min(1.0) {
        return None;
    }
    Some(start)
}

/// Distance from a point to a closed segment.
pub fn point_segment_distance(p: Point2, s: &Segment) -> f64 {
    let d = s.direction();
    let len_sq = d.dot(d);
    if len_sq == 0.0 {
        return p.distance(s.a);
    }
    let t = ((p - s.a).dot(d) / len_sq).clamp(0.0, 1.0);
    p.distance(s.point_at(t))
}

/// Ray-casting point-in-polygon test for a simple closed polygon.
///
/// Points exactly on an edge may land on either side; zone polygons are
/// drawn with margins that make the boundary case irrelevant.
pub fn point_in_polygon(p: Point2, polygon: &[Point2]) -> bool {
    let mut inside = false;
    let n = polygon.len();
    let mut j = n - 1;
    for i in 0..n {
        let (pi, pj) = (polygon[i], polygon[j]);
        if (pi.y > p.y) != (pj.y > p.y) {
            let x_cross = pj.x + (p.y - pj.y) / (pi.y - pj.y) * (pi.x - pj.x);
            if p.x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Signed shoelace area of a polygon (positive for counter-clockwise).
pub fn polygon_area(polygon: &[Point2]) -> f64 {
    let n = polygon.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        let a = polygon[i];
        let b = polygon[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    0.5 * acc
}

/// Whether a polygon is simple: no two non-adjacent edges intersect.
pub fn polygon_is_simple(polygon: &[Point2]) -> bool {
    let n = polygon.len();
    if n < 3 {
        return false;
    }
    let edge = |i: usize| Segment::new(polygon[i], polygon[(i + 1) % n]);
    for i in 0..n {
        for j in (i + 1)..n {
            // Skip edges sharing a vertex.
            if j == i || (j + 1) % n == i || (i + 1) % n == j {
                continue;
            }
            if segment_intersect(&edge(i), &edge(j)).is_some() {
                return false;
            }
        }
    }
    true
}

/// Wraps an angle to `[0, 2*pi)`.
pub fn wrap_angle(a: f64) -> f64 {
    a.rem_euclid(std::f64::consts::TAU)
}

/// Smallest signed difference `a - b` wrapped to `[-pi, pi)`.
pub fn angle_difference(a: f64, b: f64) -> f64 {
    (a - b + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI
}
