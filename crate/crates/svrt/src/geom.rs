//! Plane geometry shared by contour generation, placement and the rule
//! oracles: similarity transforms (with reflection encoded as negative
//! scale), segment intersection, polygon containment and boundary distance.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the cross product.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    pub fn from_angle(theta: f64) -> Vec2 {
        Vec2::new(theta.cos(), theta.sin())
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Similarity transform: scale by |scale| (mirror across the local vertical
/// axis when scale is negative), rotate, then translate.
///
/// `apply(v) = centre + R(rotation) * F^(scale<0) * (|scale| * v)` where
/// `F` negates the x coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Similarity {
    pub centre: Vec2,
    pub scale: f64,
    pub rotation: f64,
}

impl Similarity {
    pub fn identity() -> Self {
        Similarity { centre: Vec2::new(0.0, 0.0), scale: 1.0, rotation: 0.0 }
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        let m = self.scale.abs();
        let mut p = Vec2::new(v.x * m, v.y * m);
        if self.scale < 0.0 {
            p.x = -p.x;
        }
        let (s, c) = self.rotation.sin_cos();
        let r = Vec2::new(c * p.x - s * p.y, s * p.x + c * p.y);
        r + self.centre
    }

    pub fn apply_all(&self, pts: &[Vec2]) -> Vec<Vec2> {
        pts.iter().map(|&p| self.apply(p)).collect()
    }

    /// Composition: `self.compose(first)` applies `first`, then `self`.
    pub fn compose(&self, first: &Similarity) -> Similarity {
        let reflected = self.scale < 0.0;
        let inner_rot = if reflected { -first.rotation } else { first.rotation };
        Similarity {
            centre: self.apply(first.centre),
            scale: self.scale * first.scale,
            rotation: self.rotation + inner_rot,
        }
    }
}

fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Vec2, b: Vec2, p: Vec2) -> bool {
    p.x >= a.x.min(b.x) - 1e-12
        && p.x <= a.x.max(b.x) + 1e-12
        && p.y >= a.y.min(b.y) - 1e-12
        && p.y <= a.y.max(b.y) + 1e-12
}

/// Whether closed segments [a,b] and [c,d] intersect (including touching
/// and collinear overlap).
pub fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

fn point_segment_dist(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

pub fn segment_segment_dist(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    point_segment_dist(a, c, d)
        .min(point_segment_dist(b, c, d))
        .min(point_segment_dist(c, a, b))
        .min(point_segment_dist(d, a, b))
}

fn edges(poly: &[Vec2]) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
    (0..poly.len()).map(move |i| (poly[i], poly[(i + 1) % poly.len()]))
}

/// Whether the closed polyline has no self-intersections between
/// non-adjacent edges. O(n^2) over edge pairs.
pub fn polygon_is_simple(poly: &[Vec2]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        for j in (i + 1)..n {
            // skip adjacent edges (shared endpoint)
            if j == i || (j + 1) % n == i || (i + 1) % n == j {
                continue;
            }
            let (c, d) = (poly[j], poly[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

/// Even-odd containment test for a point strictly inside a polygon.
pub fn point_in_polygon(p: Vec2, poly: &[Vec2]) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Minimum distance between the boundaries of two polygons (0 when they
/// touch or cross).
pub fn polygons_boundary_dist(a: &[Vec2], b: &[Vec2]) -> f64 {
    let mut best = f64::INFINITY;
    for (p, q) in edges(a) {
        for (r, s) in edges(b) {
            let d = segment_segment_dist(p, q, r, s);
            if d < best {
                best = d;
                if best == 0.0 {
                    return 0.0;
                }
            }
        }
    }
    best
}

/// Whether any edge of `a` crosses any edge of `b`.
pub fn polygons_cross(a: &[Vec2], b: &[Vec2]) -> bool {
    for (p, q) in edges(a) {
        for (r, s) in edges(b) {
            if segments_intersect(p, q, r, s) {
                return true;
            }
        }
    }
    false
}

/// Whether polygon `inner` lies strictly inside `outer`: every vertex of
/// `inner` is interior to `outer` and no edges cross.
pub fn polygon_contains(outer: &[Vec2], inner: &[Vec2]) -> bool {
    inner.iter().all(|&p| point_in_polygon(p, outer)) && !polygons_cross(outer, inner)
}

pub fn bounding_box(poly: &[Vec2]) -> (Vec2, Vec2) {
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in poly {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    (lo, hi)
}

/// Area centroid of a simple polygon.
pub fn polygon_centroid(poly: &[Vec2]) -> Vec2 {
    let mut area2 = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for (a, b) in edges(poly) {
        let w = a.cross(b);
        area2 += w;
        cx += (a.x + b.x) * w;
        cy += (a.y + b.y) * w;
    }
    if area2.abs() < 1e-12 {
        // degenerate; fall back to vertex mean
        let n = poly.len() as f64;
        return Vec2::new(poly.iter().map(|p| p.x).sum::<f64>() / n, poly.iter().map(|p| p.y).sum::<f64>() / n);
    }
    Vec2::new(cx / (3.0 * area2), cy / (3.0 * area2))
}
