//! Disc-caps `K ∖ (open radius-r disc)` and the small-cap constructions
//! built on them.
//!
//! A cap is addressed by the boundary parameter `θ` of its vertex `x_u` and
//! its height `t`: the cutting disc is centered at `x_u − (r + t)u`, with `u`
//! the outer normal at `x_u`. Areas come from Green's theorem along the
//! boundary arc of `K` plus a closed-form circular part; the two crossing
//! points are located by bracketing and bisection.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{circle_centers_through, orient, segment_area, segment_area_by_angle, Point, EPS_GEO};
use crate::quad::{adaptive_simpson, bisect, golden_min, Tolerance};
use crate::rng::StreamRng;
use crate::shapes::ConvexDiscModel;

/// Bracket width at which crossing bisection stops (boundary parameter units).
pub const ROOT_TOL: f64 = 1e-13;

/// Grid for locating the farthest boundary point from a disc center.
const SEED_GRID: usize = 1024;

/// Largest step of the outward crossing scan.
const MAX_SCAN_STEP: f64 = TAU / 1024.0;

/// First step of the outward crossing scan; steps double up to [`MAX_SCAN_STEP`].
const MIN_SCAN_STEP: f64 = 1e-9;

/// Shrink factor of the three corner triangles.
pub const CORNER_SHRINK: f64 = 1.0 / 20.0;

const GREEN_TOL: Tolerance = Tolerance::new(1e-22, 1e-12);

/// Rejects radii below `r_M`; `r = r_M` is admitted.
pub(crate) fn check_radius(model: &ConvexDiscModel, r: f64) -> Result<()> {
    if !(r.is_finite() && r > 0.0) || r < model.r_m() * (1.0 - 1e-12) {
        return Err(Error::RadiusNotAdmissible { r, r_m: model.r_m() });
    }
    Ok(())
}

/// Scans from `start` in direction `dir` (±1) for the first parameter where
/// `f` is non-positive, assuming `f(start) > 0`, and refines the crossing by
/// bisection. Returns `None` if `f` stays positive over a full turn.
fn find_crossing<F: Fn(f64) -> f64>(f: &F, start: f64, dir: f64) -> Option<f64> {
    let mut prev = start;
    let mut step = MIN_SCAN_STEP;
    let mut travelled = 0.0;
    while travelled < TAU {
        let s = step.min(TAU - travelled);
        travelled += s;
        let cur = start + dir * travelled;
        if f(cur) <= 0.0 {
            return Some(bisect(f, prev, cur, ROOT_TOL));
        }
        prev = cur;
        step = (2.0 * step).min(MAX_SCAN_STEP);
    }
    None
}

/// Geometry of `K ∖ open disc(center, r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapRegion {
    pub area: f64,
    /// Length of the circular part of the cap boundary.
    pub arc_length: f64,
    /// Boundary parameters `(φ₁, φ₂)` of the crossings, with the cap's
    /// boundary arc of `K` running counterclockwise from `φ₁` to `φ₂`.
    pub crossings: Option<(f64, f64)>,
}

/// Cap cut off by the disc, given a boundary parameter `seed` that lies
/// outside the disc.
fn cap_from_seed(model: &ConvexDiscModel, center: Point, r: f64, seed: f64) -> Result<CapRegion> {
    let g = |phi: f64| model.point(phi).dist(center) - r;
    let Some(phi2) = find_crossing(&g, seed, 1.0) else {
        // The circle misses ∂K, so the disc misses K.
        return Ok(CapRegion {
            area: model.area(),
            arc_length: 0.0,
            crossings: None,
        });
    };
    let phi1 = find_crossing(&g, seed, -1.0)
        .ok_or_else(|| Error::IntersectionNotFound(format!("only one crossing found around theta = {seed}")))?;
    let p1 = model.point(phi1);
    let p2 = model.point(phi2);
    // Area between the boundary arc and the chord p2 → p1, with p1 as origin
    // so the chord contributes nothing.
    let between = 0.5
        * adaptive_simpson(
            |phi| (model.point(phi) - p1).cross(model.d1(phi)),
            phi1,
            phi2,
            GREEN_TOL,
        )?;
    // The circular part runs clockwise around the center from p2 to p1.
    let a1 = (p1 - center).y.atan2((p1 - center).x);
    let a2 = (p2 - center).y.atan2((p2 - center).x);
    let sweep = (a2 - a1).rem_euclid(TAU);
    let area = between - segment_area_by_angle(sweep, r);
    Ok(CapRegion {
        area: area.max(0.0),
        arc_length: r * sweep,
        crossings: Some((phi1, phi2)),
    })
}

/// Cap `K ∖ open disc(center, r)` for an arbitrary center.
pub fn cap_outside_disc(model: &ConvexDiscModel, center: Point, r: f64) -> Result<CapRegion> {
    let h = TAU / SEED_GRID as f64;
    let (seed, gmax) = (0..SEED_GRID)
        .map(|i| {
            let phi = h * i as f64;
            (phi, model.point(phi).dist(center) - r)
        })
        .fold(
            (0.0, f64::NEG_INFINITY),
            |best, cur| if cur.1 > best.1 { cur } else { best },
        );
    if gmax <= 0.0 {
        return Ok(CapRegion {
            area: 0.0,
            arc_length: 0.0,
            crossings: None,
        });
    }
    cap_from_seed(model, center, r, seed)
}

/// Distance from `p` to `K` (zero inside).
fn distance_to_model(model: &ConvexDiscModel, p: Point) -> f64 {
    if model.contains(p) {
        return 0.0;
    }
    let n = 512;
    let h = TAU / n as f64;
    let (best, _) = (0..n)
        .map(|i| h * i as f64)
        .map(|phi| (phi, model.point(phi).dist(p)))
        .fold((0.0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
    golden_min(|phi| model.point(phi).dist(p), best - h, best + h, 1e-12).1
}

/// Largest height for which the cutting disc still meets `K`.
pub fn t_star(model: &ConvexDiscModel, theta: f64, r: f64) -> Result<f64> {
    check_radius(model, r)?;
    let bp = model.boundary_point(theta);
    let center = |t: f64| bp.point - bp.normal * (r + t);
    let meets = |t: f64| distance_to_model(model, center(t)) <= r;
    let mut lo = 0.0;
    let mut hi = model.bbox().diagonal() * 1.01 + 1e-9;
    debug_assert!(!meets(hi));
    while hi - lo > 1e-12 * (1.0 + hi) {
        let m = 0.5 * (lo + hi);
        if meets(m) {
            lo = m;
        } else {
            hi = m;
        }
    }
    Ok(lo)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscCap {
    pub theta: f64,
    pub t: f64,
    pub r: f64,
    pub vertex: Point,
    pub normal: Point,
    pub center: Point,
    pub area: f64,
    pub arc_length: f64,
    pub t_star: f64,
    /// Points where the cutting circle crosses `∂K`.
    pub ends: Option<(Point, Point)>,
}

impl DiscCap {
    /// Ratio of the depth of the largest Euclidean cap (normal `u`) inside the
    /// disc-cap to the depth of the smallest one containing it.
    ///
    /// The point `x_u − t·u` lies on the cutting circle, so the inner depth
    /// is `t`; the outer depth is attained at a crossing point.
    pub fn depth_ratio(&self) -> Option<f64> {
        let (p1, p2) = self.ends?;
        let depth = |p: Point| (self.vertex - p).dot(self.normal);
        let outer = depth(p1).max(depth(p2));
        (outer > 0.0).then(|| self.t / outer)
    }
}

pub fn cap_from_normal_height(model: &ConvexDiscModel, theta: f64, t: f64, r: f64) -> Result<DiscCap> {
    check_radius(model, r)?;
    let t_max = t_star(model, theta, r)?;
    if !(t >= 0.0) || t > t_max * (1.0 + 1e-12) {
        return Err(Error::HeightOutOfRange { t, t_star: t_max });
    }
    let bp = model.boundary_point(theta);
    let center = bp.point - bp.normal * (r + t);
    let mut cap = DiscCap {
        theta,
        t,
        r,
        vertex: bp.point,
        normal: bp.normal,
        center,
        area: 0.0,
        arc_length: 0.0,
        t_star: t_max,
        ends: None,
    };
    if t == 0.0 {
        return Ok(cap);
    }
    let region = cap_from_seed(model, center, r, theta)?;
    cap.area = region.area;
    cap.arc_length = region.arc_length;
    cap.ends = region.crossings.map(|(a, b)| (model.point(a), model.point(b)));
    Ok(cap)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapPair {
    pub minus_area: f64,
    pub plus_area: f64,
}

/// Areas of the two caps cut by the radius-r circles through `x` and `y`,
/// smaller first.
pub fn caps_through_pair(model: &ConvexDiscModel, x: Point, y: Point, r: f64) -> Result<CapPair> {
    check_radius(model, r)?;
    if !model.contains(x) || !model.contains(y) {
        return Err(Error::PointsOutsideModel);
    }
    let (cl, cr) = circle_centers_through(x, y, r)?;
    let a = cap_outside_disc(model, cl, r)?.area;
    let b = cap_outside_disc(model, cr, r)?.area;
    Ok(CapPair {
        minus_area: a.min(b),
        plus_area: a.max(b),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triangle(pub [Point; 3]);

impl Triangle {
    pub fn area(&self) -> f64 {
        let [a, b, c] = self.0;
        0.5 * orient(a, b, c).abs()
    }

    pub fn centroid(&self) -> Point {
        let [a, b, c] = self.0;
        (a + b + c) * (1.0 / 3.0)
    }

    pub fn contains(&self, p: Point) -> bool {
        let [a, b, c] = self.0;
        let d1 = orient(a, b, p);
        let d2 = orient(b, c, p);
        let d3 = orient(c, a, p);
        let neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
        let pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
        !(neg && pos)
    }

    /// Image under the homothety centered at corner `j` with ratio `factor`.
    pub fn shrunk_toward(&self, j: usize, factor: f64) -> Triangle {
        let w = self.0[j];
        Triangle(self.0.map(|v| w + (v - w) * factor))
    }
}

/// Inscribed triangle of the Euclidean cap of height `t` and its three
/// corner triangles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapTriangles {
    /// `[w₀, w₁, w₂]`: the cap vertex and the two points of `∂K` on the
    /// cutting line, `w₁` clockwise from `w₀` and `w₂` counterclockwise.
    pub outer: Triangle,
    /// `corners[j]` is `outer` shrunk toward `w_j` by [`CORNER_SHRINK`].
    pub corners: [Triangle; 3],
}

pub fn cap_triangles(model: &ConvexDiscModel, theta: f64, t: f64) -> Result<CapTriangles> {
    if !(t > 0.0) {
        return Err(Error::HeightOutOfRange { t, t_star: f64::NAN });
    }
    let bp = model.boundary_point(theta);
    let excess = |phi: f64| t - (bp.point - model.point(phi)).dot(bp.normal);
    let width = {
        let h = TAU / SEED_GRID as f64;
        (0..SEED_GRID)
            .map(|i| (bp.point - model.point(h * i as f64)).dot(bp.normal))
            .fold(0.0f64, f64::max)
    };
    let out_of_range = || Error::HeightOutOfRange { t, t_star: width };
    if t >= width {
        return Err(out_of_range());
    }
    let p2 = find_crossing(&excess, theta, 1.0).ok_or_else(out_of_range)?;
    let p1 = find_crossing(&excess, theta, -1.0).ok_or_else(out_of_range)?;
    let outer = Triangle([bp.point, model.point(p1), model.point(p2)]);
    let corners = [0, 1, 2].map(|j| outer.shrunk_toward(j, CORNER_SHRINK));
    Ok(CapTriangles { outer, corners })
}

/// Area of the arc-triangle on `z0, z1, z2`: radius-r arcs `z0z1` and `z0z2`
/// bulging away from the triangle and arc `z1z2` bulging into it.
pub fn arc_triangle_area(z0: Point, z1: Point, z2: Point, r: f64) -> Result<f64> {
    let twice = orient(z0, z1, z2).abs();
    let scale = z0.dist(z1).max(z0.dist(z2)).max(z1.dist(z2));
    if twice <= EPS_GEO * EPS_GEO * scale * scale || scale == 0.0 {
        return Err(Error::DegenerateTriangle);
    }
    for (a, b) in [(z0, z1), (z0, z2), (z1, z2)] {
        let d = a.dist(b);
        if d > 2.0 * r * (1.0 + EPS_GEO) {
            return Err(Error::ChordTooLong {
                chord: d,
                diameter: 2.0 * r,
            });
        }
    }
    Ok(0.5 * twice + segment_area(z0.dist(z1), r)? + segment_area(z0.dist(z2), r)? - segment_area(z1.dist(z2), r)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcTriangleVariance {
    pub t: f64,
    pub samples: usize,
    pub mean: f64,
    /// Unbiased sample variance of the arc-triangle area.
    pub variance: f64,
    /// Normal-theory standard error `variance · √(2 / (M − 1))`.
    pub se: f64,
}

/// Sample variance of the arc-triangle area `Â(Z)` for `Z` uniform in the
/// corner triangle at the cap vertex, with the other two corners pinned at
/// the centroids of their corner triangles.
pub fn lemma1_variance(
    model: &ConvexDiscModel,
    theta: f64,
    t: f64,
    samples: usize,
    rng: &mut StreamRng,
    r: f64,
) -> Result<ArcTriangleVariance> {
    if samples < 2 {
        return Err(Error::OutOfRange {
            value: samples as f64,
            lo: 2.0,
            hi: f64::INFINITY,
        });
    }
    let tri = cap_triangles(model, theta, t)?;
    let z1 = tri.corners[1].centroid();
    let z2 = tri.corners[2].centroid();
    let d0 = tri.corners[0];
    let [a, b, c] = d0.0;
    let lo = Point::new(a.x.min(b.x).min(c.x), a.y.min(b.y).min(c.y));
    let hi = Point::new(a.x.max(b.x).max(c.x), a.y.max(b.y).max(c.y));
    let span = hi - lo;
    let mut values = Vec::with_capacity(samples);
    while values.len() < samples {
        let z = Point::new(lo.x + span.x * rng.uniform(), lo.y + span.y * rng.uniform());
        if d0.contains(z) {
            values.push(arc_triangle_area(z, z1, z2, r)?);
        }
    }
    let m = samples as f64;
    let mean = values.iter().sum::<f64>() / m;
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    Ok(ArcTriangleVariance {
        t,
        samples,
        mean,
        variance,
        se: variance * (2.0 / (m - 1.0)).sqrt(),
    })
}
