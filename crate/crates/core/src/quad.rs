//! Scalar numerics: adaptive Simpson quadrature, golden-section search and
//! bisection.

use crate::error::{Error, Result};

/// Maximum recursion depth of [`adaptive_simpson`].
pub const MAX_DEPTH: u32 = 40;

/// Number of equal panels the interval is split into before adapting.
/// Periodic integrands can fool a single-panel start into stopping early.
const INITIAL_PANELS: usize = 16;

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::new(1e-12, 1e-8)
    }
}

/// Adaptive Simpson integration of `f` over `[a, b]`.
///
/// The target is `max(tol.abs, tol.rel * |I|)`, with `|I|` taken from a
/// coarse composite estimate; each subinterval receives a share of the target
/// proportional to its width.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    let h = (b - a) / INITIAL_PANELS as f64;
    let mut panels = Vec::with_capacity(INITIAL_PANELS);
    let mut coarse = 0.0;
    for i in 0..INITIAL_PANELS {
        let lo = a + h * i as f64;
        let hi = if i + 1 == INITIAL_PANELS { b } else { lo + h };
        let mid = 0.5 * (lo + hi);
        let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
        let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        coarse += whole;
        panels.push((lo, hi, flo, fmid, fhi, whole));
    }
    let target = tol.abs.max(tol.rel * coarse.abs());
    let mut total = 0.0;
    for (lo, hi, flo, fmid, fhi, whole) in panels {
        let eps = target * (hi - lo) / (b - a);
        total += simpson_step(&f, lo, hi, flo, fmid, fhi, whole, eps, MAX_DEPTH)?;
    }
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, eps: f64, depth: u32) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * eps {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 || !delta.is_finite() {
        return Err(Error::QuadratureFailure(MAX_DEPTH));
    }
    Ok(simpson_step(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)?)
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a local minimum of `f` on `[a, b]`.
/// Returns `(argmin, min)`.
pub fn golden_min<F>(f: F, mut a: f64, mut b: f64, x_tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= x_tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    [(x, fx), (c, fc), (d, fd)]
        .into_iter()
        .fold((x, fx), |best, cand| if cand.1 < best.1 { cand } else { best })
}

/// Bisection for a sign change of `f` on `[a, b]`, where `f(a)` and `f(b)`
/// have opposite signs (or one is zero). Stops once the bracket is narrower
/// than `x_tol`.
pub fn bisect<F>(f: F, mut a: f64, mut b: f64, x_tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let mut fa = f(a);
    if fa == 0.0 {
        return a;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= x_tol || m == a || m == b {
            return m;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
