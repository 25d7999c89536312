//! Affine and intensity transformations.
//!
//! A real affine map `x ↦ Ax + t` induces the image-affine map
//! `p ↦ ⌊Ap + t⌋` on pixels; a pixel that lands outside `{1, …, n}²` is
//! reported as `None`.

mod affine2d;
mod affine3d;
mod descriptor;
mod intensity;

pub use affine2d::{AffineMap2D, Decomposition2D};
pub use affine3d::{AffineMap3D, Decomposition3D, RestrictedMap3D};
pub use descriptor::TransformDescriptor;
pub use intensity::IntensityMap;

/// Default bound `c` on scaling factors.
pub const DEFAULT_SCALE_BOUND: f64 = 2.0;

/// Matrices with `|det| ≤ SINGULAR_TOL` are rejected as singular.
pub const SINGULAR_TOL: f64 = 1e-12;

/// Slack allowed when checking values against closed ranges such as `[1/c, c]`.
pub(crate) const RANGE_TOL: f64 = 1e-9;

const TAU: f64 = std::f64::consts::TAU;

/// Maps an angle into `[0, 2π)`.
pub(crate) fn wrap_angle(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

#[inline]
pub(crate) fn floor_in_range(x: f64, n: usize) -> Option<usize> {
    // `x` lands in pixel ⌊x⌋, inside iff 1 ≤ x < n + 1.
    (x >= 1.0 && x < (n + 1) as f64).then_some(x as usize)
}

pub(crate) fn check_scale(s: f64, c: f64, what: &str) -> crate::Result<()> {
    if s.is_finite() && s >= 1.0 / c - RANGE_TOL && s <= c + RANGE_TOL {
        Ok(())
    } else {
        Err(crate::Error::domain(format!("{what} {s} outside [1/{c}, {c}]")))
    }
}
