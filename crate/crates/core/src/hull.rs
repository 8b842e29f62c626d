//! r-spindle convex hulls.
//!
//! [`hull_oracle`] follows the definition directly: an ordered pair `(p, q)`
//! spans an edge when the radius-r disc with `p`, `q` on its boundary and its
//! center left of `p → q` contains every point. [`hull_fast`] reaches the
//! same polygon through the ordinary convex hull and a stack scan, then
//! checks the result against every point before returning it.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{
    arc_polygon_area, classify_in_disc, left_center, orient, DiscPolygon, Point, SideClassification, EPS_GEO,
};
use crate::shapes::ConvexDiscModel;

/// Extreme directions used by the interior prefilter of [`hull_fast`].
const FILTER_DIRECTIONS: usize = 32;

/// Below this size the prefilter costs more than it saves.
const FILTER_MIN_POINTS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HullSummary {
    pub f0: usize,
    pub hull_area: f64,
    pub missed_area: f64,
    pub edge_count: usize,
}

/// What [`hull_fast_with_report`] did to reach its answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct HullReport {
    /// Points surviving the interior prefilter.
    pub candidates: usize,
    /// Vertices of the ordinary convex hull.
    pub convex_hull_vertices: usize,
    /// The scan result failed verification and the oracle answer was used.
    pub fell_back: bool,
}

fn dedup(points: &[Point]) -> Vec<Point> {
    let mut seen = HashSet::with_capacity(points.len());
    points.iter().copied().filter(|p| seen.insert(p.key())).collect()
}

/// Rotates a counterclockwise cycle so it starts at its lexicographically
/// smallest vertex; both hull routines report vertices in this order.
fn canonical_rotation(mut ring: Vec<Point>) -> Vec<Point> {
    if let Some(start) = (0..ring.len()).min_by(|&i, &j| {
        let (a, b) = (ring[i], ring[j]);
        a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y))
    }) {
        ring.rotate_left(start);
    }
    ring
}

/// Orders points in convex position counterclockwise about their centroid.
fn ccw_about_centroid(mut pts: Vec<Point>) -> Vec<Point> {
    let n = pts.len() as f64;
    let c = pts.iter().fold(Point::default(), |acc, &p| acc + p * (1.0 / n));
    pts.sort_by(|a, b| {
        let ta = (a.y - c.y).atan2(a.x - c.x);
        let tb = (b.y - c.y).atan2(b.x - c.x);
        ta.total_cmp(&tb)
    });
    pts
}

/// r-hull by exhaustive pair testing; `O(n³)`.
pub fn hull_oracle(points: &[Point], r: f64) -> Result<DiscPolygon> {
    let pts = dedup(points);
    if pts.is_empty() {
        return Err(Error::EmptyInput);
    }
    if pts.len() == 1 {
        return DiscPolygon::from_ccw_vertices(pts, r);
    }
    let mut is_vertex = vec![false; pts.len()];
    for i in 0..pts.len() {
        for j in 0..pts.len() {
            if i == j {
                continue;
            }
            let c = left_center(pts[i], pts[j], r)?;
            if pts.iter().all(|&x| classify_in_disc(c, r, x).is_contained()) {
                is_vertex[i] = true;
                is_vertex[j] = true;
            }
        }
    }
    let verts: Vec<Point> = pts
        .iter()
        .zip(&is_vertex)
        .filter_map(|(&p, &v)| v.then_some(p))
        .collect();
    let ring = if verts.len() > 2 {
        ccw_about_centroid(verts)
    } else {
        verts
    };
    DiscPolygon::from_ccw_vertices(canonical_rotation(ring), r)
}

/// Ordinary convex hull, counterclockwise, collinear points dropped
/// (Andrew's monotone chain). Duplicates are removed.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| a.key() == b.key());
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for &p in pts.iter() {
        while hull.len() >= 2 && orient(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && orient(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Drops points strictly inside the convex polygon spanned by the extreme
/// points in [`FILTER_DIRECTIONS`] directions. Those points are interior to
/// `conv(X)` and therefore to every disc containing `X`, so they can neither
/// be hull vertices nor violate an edge certificate.
fn prefilter(points: &[Point]) -> Vec<Point> {
    if points.len() < FILTER_MIN_POINTS {
        return points.to_vec();
    }
    let dirs: Vec<Point> = (0..FILTER_DIRECTIONS)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / FILTER_DIRECTIONS as f64;
            Point::new(a.cos(), a.sin())
        })
        .collect();
    let mut best = vec![(f64::NEG_INFINITY, Point::default()); FILTER_DIRECTIONS];
    for &p in points {
        for (d, b) in dirs.iter().zip(best.iter_mut()) {
            let v = d.dot(p);
            if v > b.0 {
                *b = (v, p);
            }
        }
    }
    // Extremes in increasing direction angle are already counterclockwise.
    let mut poly: Vec<Point> = Vec::with_capacity(FILTER_DIRECTIONS);
    for &(_, p) in &best {
        if poly.last().is_none_or(|q: &Point| q.key() != p.key()) {
            poly.push(p);
        }
    }
    while poly.len() > 1 && poly[0].key() == poly[poly.len() - 1].key() {
        poly.pop();
    }
    if poly.len() < 3 {
        return points.to_vec();
    }
    let scale = poly
        .iter()
        .fold(0.0f64, |m, p| m.max(p.x.abs()).max(p.y.abs()))
        .max(1.0);
    let margin = EPS_GEO * scale * scale;
    let m = poly.len();
    let edges: Vec<(Point, Point)> = (0..m).map(|i| (poly[i], poly[(i + 1) % m] - poly[i])).collect();
    // Largest disc about the polygon centroid that the polygon contains; a
    // cheap first test for the bulk of interior points.
    let centroid = poly.iter().fold(Point::default(), |acc, &p| acc + p * (1.0 / m as f64));
    let inner = edges
        .iter()
        .map(|&(a, d)| d.cross(centroid - a) / d.norm())
        .fold(f64::INFINITY, f64::min);
    let inner_sq = if inner > 0.0 {
        (inner * (1.0 - 1e-9)).powi(2)
    } else {
        0.0
    };
    points
        .iter()
        .copied()
        .filter(|&p| {
            if (p - centroid).norm_sq() < inner_sq {
                return false;
            }
            !edges.iter().all(|&(a, d)| d.cross(p - a) > margin)
        })
        .collect()
}

/// Removes convex-hull vertices that lie strictly inside the radius-r disc
/// through their current neighbours (left of `prev → next`), until none do.
fn spindle_scan(hull: &[Point], r: f64) -> Result<Vec<Point>> {
    let m = hull.len();
    if m <= 2 {
        return Ok(hull.to_vec());
    }
    let mut prev: Vec<usize> = (0..m).map(|i| (i + m - 1) % m).collect();
    let mut next: Vec<usize> = (0..m).map(|i| (i + 1) % m).collect();
    let mut alive = vec![true; m];
    let mut remaining = m;
    let mut stack: Vec<usize> = (0..m).rev().collect();
    while let Some(i) = stack.pop() {
        if remaining <= 2 {
            break;
        }
        if !alive[i] {
            continue;
        }
        let (a, b) = (prev[i], next[i]);
        let c = left_center(hull[a], hull[b], r)?;
        if classify_in_disc(c, r, hull[i]) == SideClassification::Inside {
            alive[i] = false;
            remaining -= 1;
            next[a] = b;
            prev[b] = a;
            stack.push(b);
            stack.push(a);
        }
    }
    let start = (0..m).find(|&i| alive[i]).expect("scan keeps at least two vertices");
    let mut out = Vec::with_capacity(remaining);
    let mut i = start;
    loop {
        out.push(hull[i]);
        i = next[i];
        if i == start {
            break;
        }
    }
    Ok(out)
}

/// r-hull via the ordinary convex hull and a stack scan, verified against all
/// input points; falls back to the oracle on the convex-hull vertices if the
/// verification fails.
pub fn hull_fast(points: &[Point], r: f64) -> Result<DiscPolygon> {
    hull_fast_with_report(points, r).map(|(poly, _)| poly)
}

pub fn hull_fast_with_report(points: &[Point], r: f64) -> Result<(DiscPolygon, HullReport)> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let candidates = prefilter(points);
    let hull = convex_hull(&candidates);
    let mut report = HullReport {
        candidates: candidates.len(),
        convex_hull_vertices: hull.len(),
        fell_back: false,
    };
    let ring = spindle_scan(&hull, r)?;
    let poly = DiscPolygon::from_ccw_vertices(canonical_rotation(ring), r)?;
    // The candidates include every point not strictly inside conv(candidates),
    // so certifying them certifies the full input.
    if poly.certifies(&candidates) {
        return Ok((poly, report));
    }
    log::warn!(
        "spindle scan failed verification ({} hull vertices, r = {r}); using oracle",
        hull.len()
    );
    report.fell_back = true;
    Ok((hull_oracle(&hull, r)?, report))
}

pub fn summarize(model: &ConvexDiscModel, poly: &DiscPolygon) -> Result<HullSummary> {
    if let Some(v) = poly.vertices().iter().find(|&&v| !model.contains(v)) {
        return Err(Error::VertexOutsideModel { x: v.x, y: v.y });
    }
    let hull_area = arc_polygon_area(poly)?;
    Ok(HullSummary {
        f0: poly.f0(),
        hull_area,
        missed_area: model.area() - hull_area,
        edge_count: poly.edges().len(),
    })
}
