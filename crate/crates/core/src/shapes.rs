//! Smooth convex disc models K with strictly positive boundary curvature.
//!
//! Every model is described by a 2π-periodic counterclockwise boundary map
//! `θ ↦ γ(θ)` with first and second derivatives. Circles and ellipses use
//! closed forms for their derived quantities; parametric models get them
//! numerically at construction.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::quad::{adaptive_simpson, bisect, golden_min, Tolerance};
use crate::rng::StreamRng;

/// Grid used to scan curvature and extents of parametric models.
pub const SCAN_GRID: usize = 4096;

/// Attempts allowed per accepted point in [`sample_uniform`].
pub const MAX_REJECTIONS: u64 = 1_000_000;

/// Relative slack applied to the closed membership test so that evaluated
/// boundary points are reported as contained.
const CONTAINS_SLACK: f64 = 1e-12;

/// A boundary map supplied by code. Implementations must be 2π-periodic,
/// counterclockwise, and have strictly positive curvature.
pub trait ParametricBoundary: Send + Sync {
    fn point(&self, theta: f64) -> Point;
    fn d1(&self, theta: f64) -> Point;
    fn d2(&self, theta: f64) -> Point;
}

/// Model description as it appears in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelSpec {
    Circle { rho: f64 },
    Ellipse { a: f64, b: f64 },
    Parametric { name: String },
}

impl ModelSpec {
    pub fn build(&self) -> Result<ConvexDiscModel> {
        ConvexDiscModel::from_spec(self.clone())
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::Circle { rho } => write!(f, "circle(rho={rho})"),
            ModelSpec::Ellipse { a, b } => write!(f, "ellipse(a={a}, b={b})"),
            ModelSpec::Parametric { name } => write!(f, "{name}"),
        }
    }
}

/// Boundary given by a support function `h(φ) = 1 + ε cos 3φ`; curvature
/// radius `1 - 8ε cos 3φ`, so `ε < 1/8` keeps it strictly convex.
#[derive(Debug, Clone, Copy)]
pub struct TrefoilOval {
    pub eps: f64,
}

impl ParametricBoundary for TrefoilOval {
    fn point(&self, phi: f64) -> Point {
        let h = 1.0 + self.eps * (3.0 * phi).cos();
        let dh = -3.0 * self.eps * (3.0 * phi).sin();
        let (s, c) = phi.sin_cos();
        Point::new(h * c - dh * s, h * s + dh * c)
    }

    fn d1(&self, phi: f64) -> Point {
        let rad = 1.0 - 8.0 * self.eps * (3.0 * phi).cos();
        let (s, c) = phi.sin_cos();
        Point::new(-s * rad, c * rad)
    }

    fn d2(&self, phi: f64) -> Point {
        let rad = 1.0 - 8.0 * self.eps * (3.0 * phi).cos();
        let drad = 24.0 * self.eps * (3.0 * phi).sin();
        let (s, c) = phi.sin_cos();
        Point::new(-s * drad - c * rad, c * drad - s * rad)
    }
}

/// Unit circle written as a generic parametric boundary.
#[derive(Debug, Clone, Copy)]
pub struct ParametricCircle {
    pub rho: f64,
}

impl ParametricBoundary for ParametricCircle {
    fn point(&self, t: f64) -> Point {
        Point::new(self.rho * t.cos(), self.rho * t.sin())
    }
    fn d1(&self, t: f64) -> Point {
        Point::new(-self.rho * t.sin(), self.rho * t.cos())
    }
    fn d2(&self, t: f64) -> Point {
        Point::new(-self.rho * t.cos(), -self.rho * t.sin())
    }
}

type Registry = RwLock<HashMap<String, Arc<dyn ParametricBoundary>>>;

fn registry() -> &'static Registry {
    static REG: OnceLock<Registry> = OnceLock::new();
    REG.get_or_init(|| {
        let mut m: HashMap<String, Arc<dyn ParametricBoundary>> = HashMap::new();
        m.insert("parametric-circle".into(), Arc::new(ParametricCircle { rho: 1.0 }));
        m.insert("trefoil-oval".into(), Arc::new(TrefoilOval { eps: 0.05 }));
        RwLock::new(m)
    })
}

/// Makes a boundary available to `{"kind":"parametric","name":...}` specs.
pub fn register_parametric(name: &str, boundary: Arc<dyn ParametricBoundary>) {
    registry()
        .write()
        .expect("model registry poisoned")
        .insert(name.to_string(), boundary);
}

pub fn registered_names() -> Vec<String> {
    let mut v: Vec<String> = registry()
        .read()
        .expect("model registry poisoned")
        .keys()
        .cloned()
        .collect();
    v.sort();
    v
}

fn lookup(name: &str) -> Result<Arc<dyn ParametricBoundary>> {
    registry()
        .read()
        .expect("model registry poisoned")
        .get(name)
        .cloned()
        .ok_or_else(|| Error::UnknownModel(name.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub min: Point,
    pub max: Point,
}

impl BBox {
    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }
    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }
    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }
    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }
}

#[derive(Clone)]
enum Kind {
    Circle { rho: f64 },
    Ellipse { a: f64, b: f64 },
    Parametric(Arc<dyn ParametricBoundary>),
}

/// Angular lookup for membership tests on parametric models: boundary
/// parameters sampled on a grid together with their polar angle about an
/// interior point, unwrapped to be increasing.
#[derive(Clone, Debug)]
struct RadialTable {
    origin: Point,
    thetas: Vec<f64>,
    angles: Vec<f64>,
}

/// Boundary point with outer unit normal and curvature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub point: Point,
    pub normal: Point,
    pub curvature: f64,
}

#[derive(Clone)]
pub struct ConvexDiscModel {
    spec: ModelSpec,
    kind: Kind,
    kappa_min: f64,
    kappa_max: f64,
    r_m: f64,
    area: f64,
    bbox: BBox,
    radial: Option<RadialTable>,
}

impl fmt::Debug for ConvexDiscModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConvexDiscModel")
            .field("spec", &self.spec)
            .field("kappa_min", &self.kappa_min)
            .field("kappa_max", &self.kappa_max)
            .field("r_m", &self.r_m)
            .field("area", &self.area)
            .field("bbox", &self.bbox)
            .finish()
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidModel(format!("{name} = {v} must be positive and finite")))
    }
}

impl ConvexDiscModel {
    pub fn circle(rho: f64) -> Result<Self> {
        Self::from_spec(ModelSpec::Circle { rho })
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        Self::from_spec(ModelSpec::Ellipse { a, b })
    }

    pub fn parametric(name: &str) -> Result<Self> {
        Self::from_spec(ModelSpec::Parametric { name: name.to_string() })
    }

    pub fn from_spec(spec: ModelSpec) -> Result<Self> {
        match spec {
            ModelSpec::Circle { rho } => {
                let rho = positive("rho", rho)?;
                Ok(ConvexDiscModel {
                    spec,
                    kind: Kind::Circle { rho },
                    kappa_min: 1.0 / rho,
                    kappa_max: 1.0 / rho,
                    r_m: rho,
                    area: PI * rho * rho,
                    bbox: BBox {
                        min: Point::new(-rho, -rho),
                        max: Point::new(rho, rho),
                    },
                    radial: None,
                })
            }
            ModelSpec::Ellipse { a, b } => {
                let a = positive("a", a)?;
                let b = positive("b", b)?;
                let (major, minor) = if a >= b { (a, b) } else { (b, a) };
                Ok(ConvexDiscModel {
                    spec,
                    kind: Kind::Ellipse { a, b },
                    kappa_min: minor / (major * major),
                    kappa_max: major / (minor * minor),
                    r_m: major * major / minor,
                    area: PI * a * b,
                    bbox: BBox {
                        min: Point::new(-a, -b),
                        max: Point::new(a, b),
                    },
                    radial: None,
                })
            }
            ModelSpec::Parametric { ref name } => {
                let boundary = lookup(name)?;
                Self::from_parametric(spec.clone(), boundary)
            }
        }
    }

    fn from_parametric(spec: ModelSpec, boundary: Arc<dyn ParametricBoundary>) -> Result<Self> {
        let mut model = ConvexDiscModel {
            spec,
            kind: Kind::Parametric(boundary),
            kappa_min: 0.0,
            kappa_max: 0.0,
            r_m: 0.0,
            area: 0.0,
            bbox: BBox {
                min: Point::default(),
                max: Point::default(),
            },
            radial: None,
        };
        let h = TAU / SCAN_GRID as f64;
        let grid: Vec<f64> = (0..SCAN_GRID).map(|i| h * i as f64).collect();

        let kappas: Vec<f64> = grid.iter().map(|&t| model.curvature(t)).collect();
        if let Some(bad) = kappas.iter().position(|k| !(k.is_finite() && *k > 0.0)) {
            return Err(Error::InvalidModel(format!(
                "curvature {} at theta = {} is not positive",
                kappas[bad], grid[bad]
            )));
        }
        let argmin = argbest(&kappas, |a, b| a < b);
        let argmax = argbest(&kappas, |a, b| a > b);
        let (_, kmin) = golden_min(|t| model.curvature(t), grid[argmin] - h, grid[argmin] + h, 1e-12);
        let (_, neg_kmax) = golden_min(|t| -model.curvature(t), grid[argmax] - h, grid[argmax] + h, 1e-12);
        model.kappa_min = kmin.min(kappas[argmin]);
        model.kappa_max = (-neg_kmax).max(kappas[argmax]);
        model.r_m = 1.0 / model.kappa_min;

        // Turning number check: the tangent angle must advance by exactly 2π.
        let mut turn = 0.0;
        for &t in &grid {
            let a = model.d1(t);
            let b = model.d1(t + h);
            turn += a.cross(b).atan2(a.dot(b));
        }
        if (turn - TAU).abs() > 1e-6 {
            return Err(Error::InvalidModel(format!(
                "boundary turns by {turn}, expected one counterclockwise revolution"
            )));
        }

        model.area = 0.5
            * adaptive_simpson(
                |t| model.point(t).cross(model.d1(t)),
                0.0,
                TAU,
                Tolerance::new(1e-14, 1e-12),
            )?;

        let pts: Vec<Point> = grid.iter().map(|&t| model.point(t)).collect();
        let extreme = |f: &dyn Fn(Point) -> f64| -> f64 {
            let vals: Vec<f64> = pts.iter().map(|&p| f(p)).collect();
            let i = argbest(&vals, |a, b| a < b);
            let (_, v) = golden_min(|t| f(model.point(t)), grid[i] - h, grid[i] + h, 1e-13);
            v.min(vals[i])
        };
        let xmin = extreme(&|p| p.x);
        let xmax = -extreme(&|p| -p.x);
        let ymin = extreme(&|p| p.y);
        let ymax = -extreme(&|p| -p.y);
        let pad = 1e-12 * (xmax - xmin).max(ymax - ymin);
        model.bbox = BBox {
            min: Point::new(xmin - pad, ymin - pad),
            max: Point::new(xmax + pad, ymax + pad),
        };

        let n = pts.len() as f64;
        let origin = pts.iter().fold(Point::default(), |acc, &p| acc + p * (1.0 / n));
        let mut angles = Vec::with_capacity(SCAN_GRID + 1);
        let mut prev = f64::NEG_INFINITY;
        let mut offset = 0.0;
        for p in pts.iter().chain(std::iter::once(&pts[0])) {
            let mut a = (*p - origin).y.atan2((*p - origin).x) + offset;
            while a < prev {
                offset += TAU;
                a += TAU;
            }
            angles.push(a);
            prev = a;
        }
        let mut thetas = grid.clone();
        thetas.push(TAU);
        model.radial = Some(RadialTable { origin, thetas, angles });
        Ok(model)
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn kappa_min(&self) -> f64 {
        self.kappa_min
    }

    pub fn kappa_max(&self) -> f64 {
        self.kappa_max
    }

    /// Radius of the smallest circle `K` slides freely in; `1 / κ_min`.
    pub fn r_m(&self) -> f64 {
        self.r_m
    }

    pub fn bbox(&self) -> BBox {
        self.bbox
    }

    #[inline]
    pub fn point(&self, t: f64) -> Point {
        match &self.kind {
            Kind::Circle { rho } => Point::new(rho * t.cos(), rho * t.sin()),
            Kind::Ellipse { a, b } => Point::new(a * t.cos(), b * t.sin()),
            Kind::Parametric(p) => p.point(t),
        }
    }

    #[inline]
    pub fn d1(&self, t: f64) -> Point {
        match &self.kind {
            Kind::Circle { rho } => Point::new(-rho * t.sin(), rho * t.cos()),
            Kind::Ellipse { a, b } => Point::new(-a * t.sin(), b * t.cos()),
            Kind::Parametric(p) => p.d1(t),
        }
    }

    #[inline]
    pub fn d2(&self, t: f64) -> Point {
        match &self.kind {
            Kind::Circle { rho } => Point::new(-rho * t.cos(), -rho * t.sin()),
            Kind::Ellipse { a, b } => Point::new(-a * t.cos(), -b * t.sin()),
            Kind::Parametric(p) => p.d2(t),
        }
    }

    /// Signed curvature; closed form for circles and ellipses, otherwise
    /// from the first two derivatives.
    pub fn curvature(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Circle { rho } => 1.0 / rho,
            Kind::Ellipse { a, b } => {
                let (s, c) = t.sin_cos();
                a * b / (a * a * s * s + b * b * c * c).powf(1.5)
            }
            Kind::Parametric(_) => {
                let d1 = self.d1(t);
                let d2 = self.d2(t);
                d1.cross(d2) / d1.norm().powi(3)
            }
        }
    }

    /// `|γ'(θ)|`, the arc-length Jacobian.
    pub fn speed(&self, t: f64) -> f64 {
        self.d1(t).norm()
    }

    pub fn boundary_point(&self, t: f64) -> BoundaryPoint {
        let d1 = self.d1(t);
        let tangent = d1.normalized();
        BoundaryPoint {
            point: self.point(t),
            normal: Point::new(tangent.y, -tangent.x),
            curvature: self.curvature(t),
        }
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    /// Closed membership test.
    pub fn contains(&self, p: Point) -> bool {
        match &self.kind {
            Kind::Circle { rho } => p.norm_sq() <= rho * rho * (1.0 + CONTAINS_SLACK),
            Kind::Ellipse { a, b } => {
                let u = p.x / a;
                let v = p.y / b;
                u * u + v * v <= 1.0 + CONTAINS_SLACK
            }
            Kind::Parametric(_) => {
                let table = self.radial.as_ref().expect("parametric model without radial table");
                let d = p - table.origin;
                let r2 = d.norm_sq();
                if r2 == 0.0 {
                    return true;
                }
                let theta = self.theta_toward(table, d.y.atan2(d.x));
                let rb = (self.point(theta) - table.origin).norm_sq();
                r2 <= rb * (1.0 + CONTAINS_SLACK)
            }
        }
    }

    /// Boundary parameter whose point is seen from the table origin at polar
    /// angle `angle`.
    fn theta_toward(&self, table: &RadialTable, angle: f64) -> f64 {
        let base = table.angles[0];
        let target = base + (angle - base).rem_euclid(TAU);
        let i = table
            .angles
            .partition_point(|&a| a <= target)
            .clamp(1, table.angles.len() - 1);
        let (lo, hi) = (table.thetas[i - 1], table.thetas[i]);
        let origin = table.origin;
        let ray = Point::new(angle.cos(), angle.sin());
        // Sign of the boundary point's side relative to the ray flips once in the bracket.
        bisect(|t| ray.cross(self.point(t) - origin), lo, hi, 1e-14)
    }

    /// Parameter of the boundary point whose outer normal has angle `phi`.
    pub fn theta_for_normal_angle(&self, phi: f64) -> f64 {
        match &self.kind {
            Kind::Circle { .. } => phi,
            // Outer normal of (a cos t, b sin t) is proportional to (b cos t, a sin t).
            Kind::Ellipse { a, b } => (b * phi.sin()).atan2(a * phi.cos()),
            Kind::Parametric(_) => {
                let normal_angle = |t: f64| {
                    let n = self.boundary_point(t).normal;
                    n.y.atan2(n.x)
                };
                let h = TAU / SCAN_GRID as f64;
                let wrap = |x: f64| (x + PI).rem_euclid(TAU) - PI;
                let i = (0..SCAN_GRID)
                    .min_by(|&i, &j| {
                        let di = wrap(normal_angle(h * i as f64) - phi).abs();
                        let dj = wrap(normal_angle(h * j as f64) - phi).abs();
                        di.total_cmp(&dj)
                    })
                    .unwrap_or(0);
                let t0 = h * i as f64;
                bisect(|t| wrap(normal_angle(t) - phi), t0 - h, t0 + h, 1e-14)
            }
        }
    }
}

fn argbest(v: &[f64], better: impl Fn(f64, f64) -> bool) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if better(x, v[best]) {
            best = i;
        }
    }
    best
}

/// `n` i.i.d. uniform points in `K`, by rejection from the bounding box.
pub fn sample_uniform(model: &ConvexDiscModel, rng: &mut StreamRng, n: usize) -> Result<Vec<Point>> {
    let mut out = Vec::with_capacity(n);
    sample_into(model, rng, n, &mut out)?;
    Ok(out)
}

/// Appends `n` uniform points to `out`.
pub fn sample_into(model: &ConvexDiscModel, rng: &mut StreamRng, n: usize, out: &mut Vec<Point>) -> Result<()> {
    let bb = model.bbox;
    let (w, h) = (bb.width(), bb.height());
    out.reserve(n);
    for _ in 0..n {
        let mut attempts = 0u64;
        loop {
            let p = Point::new(bb.min.x + w * rng.uniform(), bb.min.y + h * rng.uniform());
            if model.contains(p) {
                out.push(p);
                break;
            }
            attempts += 1;
            if attempts >= MAX_REJECTIONS {
                return Err(Error::SamplerStall(MAX_REJECTIONS));
            }
        }
    }
    Ok(())
}
