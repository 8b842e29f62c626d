//! Planar primitives: points, radius-r circles through point pairs, circular
//! segments and arc-polygon areas.
//!
//! All predicates share one tolerance policy: a relative tolerance
//! [`EPS_GEO`] scaled by the radius involved. A point whose distance to a
//! circle is within `EPS_GEO * r` of `r` is classified as on the boundary.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Module-wide relative tolerance.
pub const EPS_GEO: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// Checked constructor; rejects NaN and infinities.
    pub fn try_new(x: f64, y: f64) -> Result<Self> {
        if x.is_finite() && y.is_finite() {
            Ok(Point { x, y })
        } else {
            Err(Error::NonFinite { x, y })
        }
    }

    #[inline]
    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the cross product `self × o`.
    #[inline]
    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    /// Rotation by +90 degrees.
    #[inline]
    pub fn perp(self) -> Point {
        Point::new(-self.y, self.x)
    }

    pub fn normalized(self) -> Point {
        let n = self.norm();
        Point::new(self.x / n, self.y / n)
    }

    pub fn midpoint(self, o: Point) -> Point {
        Point::new(0.5 * (self.x + o.x), 0.5 * (self.y + o.y))
    }

    /// Bit pattern key with `-0.0` folded onto `0.0`, for exact-equality hashing.
    pub fn key(self) -> (u64, u64) {
        let fold = |v: f64| if v == 0.0 { 0u64 } else { v.to_bits() };
        (fold(self.x), fold(self.y))
    }
}

impl Add for Point {
    type Output = Point;
    #[inline]
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    #[inline]
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    #[inline]
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl Neg for Point {
    type Output = Point;
    #[inline]
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Twice the signed area of triangle `(a, b, c)`; positive when counterclockwise.
#[inline]
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SideClassification {
    Inside,
    OnBoundary,
    Outside,
}

impl SideClassification {
    /// Inside or on the boundary.
    #[inline]
    pub fn is_contained(self) -> bool {
        self != SideClassification::Outside
    }
}

/// The two centers of radius-`r` circles through `p` and `q`, returned as
/// `(left, right)` relative to the directed chord `p → q`.
///
/// A chord of length exactly `2r` (within tolerance) yields the midpoint twice.
pub fn circle_centers_through(p: Point, q: Point, r: f64) -> Result<(Point, Point)> {
    let d = q - p;
    let chord = d.norm();
    if chord == 0.0 {
        return Err(Error::DegenerateChord);
    }
    let half = 0.5 * chord;
    if half > r * (1.0 + EPS_GEO) {
        return Err(Error::ChordTooLong {
            chord,
            diameter: 2.0 * r,
        });
    }
    // (r - h)(r + h) avoids cancellation near the diameter.
    let h = ((r - half).max(0.0) * (r + half)).sqrt();
    let mid = p.midpoint(q);
    let off = d.perp() * (h / chord);
    Ok((mid + off, mid - off))
}

/// Left center only; the disc that carries the outward-bulging arc `p → q`
/// of a counterclockwise disc-polygon.
#[inline]
pub fn left_center(p: Point, q: Point, r: f64) -> Result<Point> {
    circle_centers_through(p, q, r).map(|(l, _)| l)
}

pub fn classify_in_disc(center: Point, r: f64, x: Point) -> SideClassification {
    let d = x.dist(center);
    let band = EPS_GEO * r;
    if d < r - band {
        SideClassification::Inside
    } else if d > r + band {
        SideClassification::Outside
    } else {
        SideClassification::OnBoundary
    }
}

/// `θ - sin θ`, accurate for small angles.
pub fn theta_minus_sin(theta: f64) -> f64 {
    if theta.abs() < 0.25 {
        // Alternating series; 8 terms reach full precision for |θ| < 0.25.
        let t2 = theta * theta;
        let mut term = theta * t2 / 6.0;
        let mut sum = 0.0;
        let mut k = 3.0;
        for _ in 0..8 {
            sum += term;
            term *= -t2 / ((k + 1.0) * (k + 2.0));
            k += 2.0;
        }
        sum
    } else {
        theta - theta.sin()
    }
}

/// Area of a circular segment of a radius-`r` circle spanning central angle `angle`.
#[inline]
pub fn segment_area_by_angle(angle: f64, r: f64) -> f64 {
    0.5 * r * r * theta_minus_sin(angle)
}

/// Area of the minor circular segment cut from a radius-`r` circle by a
/// chord of the given length.
pub fn segment_area(chord: f64, r: f64) -> Result<f64> {
    if !(chord >= 0.0) || chord > 2.0 * r * (1.0 + EPS_GEO) {
        return Err(Error::OutOfRange {
            value: chord,
            lo: 0.0,
            hi: 2.0 * r,
        });
    }
    let s = (chord / (2.0 * r)).min(1.0);
    Ok(segment_area_by_angle(2.0 * s.asin(), r))
}

/// Signed shoelace area of a closed polygon (positive for counterclockwise).
pub fn shoelace_area(vertices: &[Point]) -> f64 {
    if vertices.len() < 3 {
        return 0.0;
    }
    // Anchor at the first vertex to limit cancellation.
    let o = vertices[0];
    let mut twice = 0.0;
    for w in vertices[1..].windows(2) {
        twice += (w[0] - o).cross(w[1] - o);
    }
    0.5 * twice
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    Ccw,
}

/// A radius-`r` arc from `a` to `b` around `center`, bulging to the right of
/// the directed chord `a → b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcEdge {
    pub a: Point,
    pub b: Point,
    pub center: Point,
    pub radius: f64,
    pub orientation: Orientation,
}

impl ArcEdge {
    pub fn new(a: Point, b: Point, radius: f64) -> Result<Self> {
        let center = left_center(a, b, radius)?;
        Ok(ArcEdge {
            a,
            b,
            center,
            radius,
            orientation: Orientation::Ccw,
        })
    }

    pub fn chord(&self) -> f64 {
        self.a.dist(self.b)
    }

    fn check(&self) -> Result<()> {
        let tol = EPS_GEO * self.radius.max(1.0);
        let ra = self.a.dist(self.center);
        let rb = self.b.dist(self.center);
        if (ra - self.radius).abs() > tol || (rb - self.radius).abs() > tol {
            return Err(Error::InvalidPolygon(format!(
                "endpoint distances {ra}, {rb} differ from radius {}",
                self.radius
            )));
        }
        if self.chord() > 2.0 * self.radius + tol {
            return Err(Error::InvalidPolygon(format!(
                "chord {} longer than 2r = {}",
                self.chord(),
                2.0 * self.radius
            )));
        }
        Ok(())
    }
}

/// A convex region bounded by radius-`r` arcs. Vertices are counterclockwise;
/// edge `i` joins vertex `i` to vertex `i + 1 (mod f0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscPolygon {
    vertices: Vec<Point>,
    radius: f64,
    edges: Vec<ArcEdge>,
}

impl DiscPolygon {
    /// Builds the edges for a counterclockwise vertex list.
    ///
    /// One vertex gives a point (no edges); two give the lens bounded by both
    /// radius-`r` arcs through them.
    pub fn from_ccw_vertices(vertices: Vec<Point>, radius: f64) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::EmptyInput);
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidPolygon(format!("radius {radius} must be positive")));
        }
        let mut seen = std::collections::HashSet::with_capacity(vertices.len());
        for v in &vertices {
            if !seen.insert(v.key()) {
                return Err(Error::InvalidPolygon(format!("duplicate vertex ({}, {})", v.x, v.y)));
            }
        }
        let m = vertices.len();
        let edges = match m {
            1 => Vec::new(),
            _ => (0..m)
                .map(|i| ArcEdge::new(vertices[i], vertices[(i + 1) % m], radius))
                .collect::<Result<Vec<_>>>()?,
        };
        Ok(DiscPolygon {
            vertices,
            radius,
            edges,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn edges(&self) -> &[ArcEdge] {
        &self.edges
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn f0(&self) -> usize {
        self.vertices.len()
    }

    /// True iff every point lies in every edge's closed supporting disc
    /// (boundary band included).
    pub fn certifies(&self, points: &[Point]) -> bool {
        self.edges.iter().all(|e| {
            points
                .iter()
                .all(|&p| classify_in_disc(e.center, self.radius, p).is_contained())
        })
    }

    /// The spindle-convexity certificate on the polygon's own vertices.
    pub fn is_spindle_convex(&self) -> bool {
        self.certifies(&self.vertices)
    }
}

/// Area of a disc-polygon: shoelace area of the vertices plus one minor
/// segment per edge.
pub fn arc_polygon_area(poly: &DiscPolygon) -> Result<f64> {
    let mut area = shoelace_area(&poly.vertices);
    for e in &poly.edges {
        e.check()?;
        area += segment_area(e.chord(), poly.radius)?;
    }
    Ok(area)
}

/// Area of the disc of radius `r`.
#[inline]
pub fn disc_area(r: f64) -> f64 {
    PI * r * r
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT3: f64 = 1.732_050_807_568_877_2;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn centers_of_diameter_chord_coincide() {
        let (l, r) = circle_centers_through(Point::new(-1.0, 0.0), Point::new(1.0, 0.0), 1.0).unwrap();
        assert!(close(l.x, 0.0, 1e-15) && close(l.y, 0.0, 1e-15));
        assert_eq!(l, r);
    }

    #[test]
    fn centers_of_unit_chord() {
        let (l, r) = circle_centers_through(Point::new(0.0, 0.0), Point::new(1.0, 0.0), 1.0).unwrap();
        assert!(close(l.x, 0.5, 1e-15) && close(l.y, SQRT3 / 2.0, 1e-15));
        assert!(close(r.x, 0.5, 1e-15) && close(r.y, -SQRT3 / 2.0, 1e-15));
        assert!(orient(Point::new(0.0, 0.0), Point::new(1.0, 0.0), l) > 0.0);
    }

    #[test]
    fn centers_residuals() {
        let p = Point::new(0.0, 0.0);
        let q = Point::new(0.3, 0.4);
        let (l, r) = circle_centers_through(p, q, 2.0).unwrap();
        for c in [l, r] {
            assert!(close(c.dist(p), 2.0, 1e-12));
            assert!(close(c.dist(q), 2.0, 1e-12));
        }
    }

    #[test]
    fn centers_errors() {
        let p = Point::new(0.0, 0.0);
        assert_eq!(circle_centers_through(p, p, 1.0), Err(Error::DegenerateChord));
        assert!(matches!(
            circle_centers_through(p, Point::new(3.0, 0.0), 1.0),
            Err(Error::ChordTooLong { .. })
        ));
        // Just inside the tolerance band counts as a diameter.
        assert!(circle_centers_through(p, Point::new(2.0 + 1e-12, 0.0), 1.0).is_ok());
    }

    #[test]
    fn classification() {
        let c = Point::new(0.0, 0.0);
        assert_eq!(
            classify_in_disc(c, 1.0, Point::new(0.0, 0.0)),
            SideClassification::Inside
        );
        assert_eq!(
            classify_in_disc(c, 1.0, Point::new(1.0, 0.0)),
            SideClassification::OnBoundary
        );
        assert_eq!(
            classify_in_disc(c, 1.0, Point::new(1.5, 0.0)),
            SideClassification::Outside
        );
        assert_eq!(
            classify_in_disc(c, 1.0, Point::new(1.0 + 1e-11, 0.0)),
            SideClassification::OnBoundary
        );
    }

    #[test]
    fn segment_area_endpoints() {
        assert_eq!(segment_area(0.0, 1.0).unwrap(), 0.0);
        assert!(close(segment_area(2.0, 1.0).unwrap(), PI / 2.0, 1e-15));
        let th = PI / 3.0;
        assert!(close(segment_area(1.0, 1.0).unwrap(), (th - th.sin()) / 2.0, 1e-15));
        assert!(segment_area(-0.1, 1.0).is_err());
        assert!(segment_area(2.1, 1.0).is_err());
    }

    #[test]
    fn theta_minus_sin_series_matches_direct() {
        for &t in &[0.2499, 0.1, 0.01] {
            let direct = t - f64::sin(t);
            assert!((theta_minus_sin(t) - direct).abs() <= 1e-15);
        }
        // Continuity across the switch point.
        let a = theta_minus_sin(0.25 - 1e-12);
        let b = theta_minus_sin(0.25 + 1e-12);
        assert!((a - b).abs() < 1e-13);
    }

    #[test]
    fn polygon_construction_rules() {
        let p = Point::new(0.0, 0.0);
        assert!(matches!(
            DiscPolygon::from_ccw_vertices(vec![p, p], 1.0),
            Err(Error::InvalidPolygon(_))
        ));
        let single = DiscPolygon::from_ccw_vertices(vec![p], 1.0).unwrap();
        assert_eq!(single.edges().len(), 0);
        assert_eq!(arc_polygon_area(&single).unwrap(), 0.0);
        let lens = DiscPolygon::from_ccw_vertices(vec![p, Point::new(1.0, 0.0)], 1.0).unwrap();
        assert_eq!(lens.edges().len(), 2);
        assert!(close(
            arc_polygon_area(&lens).unwrap(),
            2.0 * segment_area(1.0, 1.0).unwrap(),
            1e-15
        ));
        assert!(lens.is_spindle_convex());
    }

    #[test]
    fn equilateral_triangle_area() {
        let tri = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.5, SQRT3 / 2.0)];
        let poly = DiscPolygon::from_ccw_vertices(tri, 1.0).unwrap();
        let expect = SQRT3 / 4.0 + 3.0 * segment_area(1.0, 1.0).unwrap();
        assert!(close(arc_polygon_area(&poly).unwrap(), expect, 1e-14));
    }

    #[test]
    fn non_finite_rejected() {
        assert!(Point::try_new(f64::NAN, 0.0).is_err());
        assert!(Point::try_new(0.0, f64::INFINITY).is_err());
        assert!(Point::try_new(1.0, 2.0).is_ok());
    }
}
