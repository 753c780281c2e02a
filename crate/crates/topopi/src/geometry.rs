//! 2D geometric primitives shared by the environment and topology modules.

use serde::{Deserialize, Serialize};

/// A point (or vector) in the plane, in workspace units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(&self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn dist_sq(&self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn midpoint(&self, other: Point) -> Point {
        Point::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }
}

impl From<[f64; 2]> for Point {
    fn from(p: [f64; 2]) -> Self {
        Point::new(p[0], p[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

/// Axis-aligned rectangle given by two corners with `min <= max` componentwise.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn new(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Self {
        Rect {
            min: Point::new(xmin, ymin),
            max: Point::new(xmax, ymax),
        }
    }

    /// Strict interior test; rectangle boundary does not count.
    pub fn contains_interior(&self, p: Point) -> bool {
        p.x > self.min.x && p.x < self.max.x && p.y > self.min.y && p.y < self.max.y
    }

    pub fn contains_closed(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn diagonal(&self) -> f64 {
        self.min.dist(self.max)
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Squared distance from point `p` to the closed segment `[a, b]`.
pub fn dist_sq_point_segment(p: Point, a: Point, b: Point) -> f64 {
    let len_sq = a.dist_sq(b);
    if len_sq == 0.0 {
        return p.dist_sq(a);
    }
    let t = ((p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y)) / len_sq;
    let t = t.clamp(0.0, 1.0);
    let proj = Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y));
    p.dist_sq(proj)
}

/// True if the closed segments `[p1, q1]` and `[p2, q2]` share at least one point.
pub fn segments_intersect(p1: Point, q1: Point, p2: Point, q2: Point) -> bool {
    let d1 = cross(p2, q2, p1);
    let d2 = cross(p2, q2, q1);
    let d3 = cross(p1, q1, p2);
    let d4 = cross(p1, q1, q2);

    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    // Collinear cases: endpoint lying on the other segment.
    (d1 == 0.0 && on_segment(p2, q2, p1))
        || (d2 == 0.0 && on_segment(p2, q2, q1))
        || (d3 == 0.0 && on_segment(p1, q1, p2))
        || (d4 == 0.0 && on_segment(p1, q1, q2))
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// True if `p` lies inside or on the boundary of the convex polygon `verts`
/// (vertices in order, either orientation).
pub fn point_in_convex_polygon(p: Point, verts: &[Point]) -> bool {
    if verts.len() < 3 {
        return false;
    }
    let mut has_pos = false;
    let mut has_neg = false;
    for i in 0..verts.len() {
        let a = verts[i];
        let b = verts[(i + 1) % verts.len()];
        let d = cross(a, b, p);
        if d > 0.0 {
            has_pos = true;
        } else if d < 0.0 {
            has_neg = true;
        }
        if has_pos && has_neg {
            return false;
        }
    }
    true
}

/// Strict interior of a convex polygon; boundary excluded.
pub fn point_in_convex_polygon_interior(p: Point, verts: &[Point]) -> bool {
    if verts.len() < 3 {
        return false;
    }
    let mut sign = 0.0f64;
    for i in 0..verts.len() {
        let a = verts[i];
        let b = verts[(i + 1) % verts.len()];
        let d = cross(a, b, p);
        if d == 0.0 {
            return false;
        }
        if sign == 0.0 {
            sign = d.signum();
        } else if d.signum() != sign {
            return false;
        }
    }
    true
}

/// True if the closed segment `[a, b]` intersects the closed disc.
pub fn segment_intersects_disc(a: Point, b: Point, center: Point, radius: f64) -> bool {
    dist_sq_point_segment(center, a, b) <= radius * radius
}

/// True if the closed segment `[a, b]` intersects the closed convex polygon.
pub fn segment_intersects_polygon(a: Point, b: Point, verts: &[Point]) -> bool {
    if point_in_convex_polygon(a, verts) || point_in_convex_polygon(b, verts) {
        return true;
    }
    for i in 0..verts.len() {
        let v0 = verts[i];
        let v1 = verts[(i + 1) % verts.len()];
        if segments_intersect(a, b, v0, v1) {
            return true;
        }
    }
    false
}

/// Minimum distance between two closed convex polygons (0 if they touch or overlap).
pub fn polygon_polygon_distance(pa: &[Point], pb: &[Point]) -> f64 {
    for &v in pa {
        if point_in_convex_polygon(v, pb) {
            return 0.0;
        }
    }
    for &v in pb {
        if point_in_convex_polygon(v, pa) {
            return 0.0;
        }
    }
    let mut best = f64::INFINITY;
    for i in 0..pa.len() {
        let a0 = pa[i];
        let a1 = pa[(i + 1) % pa.len()];
        for j in 0..pb.len() {
            let b0 = pb[j];
            let b1 = pb[(j + 1) % pb.len()];
            if segments_intersect(a0, a1, b0, b1) {
                return 0.0;
            }
            best = best
                .min(dist_sq_point_segment(b0, a0, a1))
                .min(dist_sq_point_segment(b1, a0, a1))
                .min(dist_sq_point_segment(a0, b0, b1))
                .min(dist_sq_point_segment(a1, b0, b1));
        }
    }
    best.sqrt()
}

/// Minimum distance from a convex polygon to a disc (0 on contact/overlap).
pub fn polygon_disc_distance(verts: &[Point], center: Point, radius: f64) -> f64 {
    if point_in_convex_polygon(center, verts) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for i in 0..verts.len() {
        let a = verts[i];
        let b = verts[(i + 1) % verts.len()];
        best = best.min(dist_sq_point_segment(center, a, b));
    }
    (best.sqrt() - radius).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_intersection_basic() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(2.0, 2.0);
        let c = Point::new(0.0, 2.0);
        let d = Point::new(2.0, 0.0);
        assert!(segments_intersect(a, b, c, d));
        assert!(!segments_intersect(a, Point::new(0.5, 0.5), c, d));
    }

    #[test]
    fn segment_intersection_collinear_touch() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(1.0, 0.0);
        let c = Point::new(1.0, 0.0);
        let d = Point::new(2.0, 0.0);
        assert!(segments_intersect(a, b, c, d));
    }

    #[test]
    fn point_in_polygon_boundary() {
        let square = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        assert!(point_in_convex_polygon(Point::new(0.5, 0.5), &square));
        assert!(point_in_convex_polygon(Point::new(1.0, 0.5), &square));
        assert!(!point_in_convex_polygon_interior(Point::new(1.0, 0.5), &square));
        assert!(!point_in_convex_polygon(Point::new(1.2, 0.5), &square));
    }

    #[test]
    fn disc_segment() {
        let c = Point::new(0.0, 0.0);
        assert!(segment_intersects_disc(
            Point::new(-2.0, 0.5),
            Point::new(2.0, 0.5),
            c,
            1.0
        ));
        assert!(!segment_intersects_disc(
            Point::new(-2.0, 1.5),
            Point::new(2.0, 1.5),
            c,
            1.0
        ));
    }
}
