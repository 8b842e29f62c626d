//! Closed-form limit targets for random disc-polygons in a smooth convex disc.
//!
//! For `r > r_M`,
//!
//! ```text
//! E f₀ · n^{-1/3}        →  (2 / (3 A(K)))^{1/3} · Γ(5/3) · c₁(K, r)
//! E A(K ∖ Kₙ) · n^{2/3}  →  (2 A(K)² / 3)^{1/3} · Γ(5/3) · c₁(K, r)
//! c₁(K, r) = ∫_{∂K} (κ − 1/r)^{1/3} ds
//! ```
//!
//! For the unit circle with `r = 1` the coefficients vanish and the limits
//! are `E f₀ → π²/2` and `n · E A(B ∖ Bₙ) → π³/2` instead.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::caps::check_radius;
use crate::error::Result;
use crate::quad::{adaptive_simpson, Tolerance};
use crate::shapes::ConvexDiscModel;

/// Limit of `E f₀` for the unit circle at `r = 1`.
pub const CIRCLE_VERTEX_LIMIT: f64 = PI * PI / 2.0;

/// Limit of `n · E(missed area)` for the unit circle at `r = 1`.
pub const CIRCLE_AREA_LIMIT: f64 = PI * PI * PI / 2.0;

/// Quadrature thresholds for `c₁`.
pub const C1_TOLERANCE: Tolerance = Tolerance::new(1e-12, 1e-8);

// Lanczos approximation, g = 7, nine terms; relative error below 2e-15 on
// the positive real axis.
const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function via the Lanczos approximation with reflection for `x < 1/2`.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (TAU).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitConstants {
    pub c1: f64,
    pub vertex_coeff: f64,
    pub area_coeff: f64,
    pub gamma_5_3: f64,
}

fn c1_integrand(model: &ConvexDiscModel, r: f64, theta: f64) -> f64 {
    // Clamped so that r = r_M evaluates to zero rather than NaN.
    (model.curvature(theta) - 1.0 / r).max(0.0).cbrt() * model.speed(theta)
}

/// `c₁(K, r)` integrated over the boundary parameter range `[lo, hi]`.
pub fn c1_partial(model: &ConvexDiscModel, r: f64, lo: f64, hi: f64, tol: Tolerance) -> Result<f64> {
    check_radius(model, r)?;
    adaptive_simpson(|t| c1_integrand(model, r, t), lo, hi, tol)
}

/// `c₁(K, r) = ∫_{∂K} (κ − 1/r)^{1/3} ds`.
pub fn c1(model: &ConvexDiscModel, r: f64) -> Result<f64> {
    c1_partial(model, r, 0.0, TAU, C1_TOLERANCE)
}

pub fn limit_constants(model: &ConvexDiscModel, r: f64) -> Result<LimitConstants> {
    let c1 = c1(model, r)?;
    let area = model.area();
    let g = gamma(5.0 / 3.0);
    Ok(LimitConstants {
        c1,
        vertex_coeff: (2.0 / (3.0 * area)).cbrt() * g * c1,
        area_coeff: (2.0 * area * area / 3.0).cbrt() * g * c1,
        gamma_5_3: g,
    })
}
