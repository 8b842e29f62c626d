//! Spindle convex hulls of planar point sets and random disc-polygons.
//!
//! The r-spindle convex hull `conv_r(X)` of a point set is the intersection
//! of all closed radius-r discs containing it. For `n` uniform points in a
//! smooth convex disc `K` this crate computes the hull ([`hull`]), measures
//! its vertex count and missed area, runs seeded Monte Carlo experiments over
//! an `n` grid ([`experiment`]), and evaluates the limit constants those
//! experiments converge to ([`theory`]). [`caps`] holds the disc-cap geometry
//! that governs the small-scale behaviour near `∂K`.

// `!(x > 0.0)` is used deliberately so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod caps;
pub mod error;
pub mod experiment;
pub mod geom;
pub mod hull;
pub mod quad;
pub mod rng;
pub mod shapes;
pub mod theory;

pub use error::{Error, Result};
pub use geom::{DiscPolygon, Point};
pub use rng::StreamRng;
pub use shapes::{ConvexDiscModel, ModelSpec};
