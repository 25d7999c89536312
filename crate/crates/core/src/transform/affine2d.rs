use serde::{Deserialize, Serialize};

use super::{check_scale, floor_in_range, wrap_angle, SINGULAR_TOL};
use crate::error::{Error, Result};
use crate::image::Pixel;

/// A real affine map of the plane, `x ↦ Ax + t`, with non-singular `A`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineMap2D {
    a: [[f64; 2]; 2],
    t: [f64; 2],
}

impl AffineMap2D {
    pub fn new(a: [[f64; 2]; 2], t: [f64; 2]) -> Result<Self> {
        let m = Self { a, t };
        if a.iter().flatten().chain(&t).any(|v| !v.is_finite()) {
            return Err(Error::domain("affine map has non-finite entries"));
        }
        if m.det().abs() <= SINGULAR_TOL {
            return Err(Error::domain(format!("matrix {a:?} is singular")));
        }
        Ok(m)
    }

    pub const fn identity() -> Self {
        Self { a: [[1.0, 0.0], [0.0, 1.0]], t: [0.0, 0.0] }
    }

    pub const fn translation(ti: f64, tj: f64) -> Self {
        Self { a: [[1.0, 0.0], [0.0, 1.0]], t: [ti, tj] }
    }

    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self { a: [[c, -s], [s, c]], t: [0.0, 0.0] }
    }

    /// A map that sends every pixel of an `n × n` image outside it.
    pub fn all_out(n: usize) -> Self {
        Self::translation(n as f64, n as f64)
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        self.a
    }

    pub fn translation_part(&self) -> [f64; 2] {
        self.t
    }

    pub fn det(&self) -> f64 {
        self.a[0][0] * self.a[1][1] - self.a[0][1] * self.a[1][0]
    }

    /// `A x + t` for a real point `x`.
    #[inline]
    pub fn apply_real(&self, x: [f64; 2]) -> [f64; 2] {
        [self.a[0][0] * x[0] + self.a[0][1] * x[1] + self.t[0], self.a[1][0] * x[0] + self.a[1][1] * x[1] + self.t[1]]
    }

    /// The image-affine action `⌊Ap + t⌋`, or `None` when it leaves `{1, …, n}²`.
    #[inline]
    pub fn apply_image(&self, p: Pixel, n: usize) -> Option<Pixel> {
        let [x, y] = self.apply_real([p.i as f64, p.j as f64]);
        Some(Pixel::new(floor_in_range(x, n)?, floor_in_range(y, n)?))
    }

    /// The map `x ↦ outer(self(x))`.
    pub fn then(&self, outer: &AffineMap2D) -> AffineMap2D {
        let (a, b) = (outer.a, self.a);
        let mut m = [[0.0; 2]; 2];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        let t = outer.apply_real(self.t);
        AffineMap2D { a: m, t }
    }

    pub fn inverse(&self) -> AffineMap2D {
        let d = self.det();
        let a = [[self.a[1][1] / d, -self.a[0][1] / d], [-self.a[1][0] / d, self.a[0][0] / d]];
        let t = [-(a[0][0] * self.t[0] + a[0][1] * self.t[1]), -(a[1][0] * self.t[0] + a[1][1] * self.t[1])];
        AffineMap2D { a, t }
    }

    /// Singular values of `A`, largest first.
    pub fn singular_values(&self) -> (f64, f64) {
        let (q, r, _, _) = svd_terms(self.a);
        (q + r, (q - r).abs())
    }

    /// Checks that both singular values lie in `[1/c, c]`.
    pub fn validate_scaling(&self, c: f64) -> Result<()> {
        let (s1, s2) = self.singular_values();
        check_scale(s1, c, "largest singular value")?;
        check_scale(s2, c, "smallest singular value")
    }

    /// Whether the map keeps at least one pixel of `{1, …, n}²` inside the image.
    pub fn keeps_some_pixel(&self, n: usize) -> bool {
        Pixel::all(n).any(|p| self.apply_image(p, n).is_some())
    }

    /// Rotation–scale–rotation–translation decomposition of an orientation-preserving map.
    ///
    /// Canonical form: `sx ≥ sy > 0`, `θ₁ ∈ [0, π)`, `θ₂ ∈ [0, 2π)`; when
    /// `sx = sy` the whole rotation is carried by `θ₂` and `θ₁ = 0`.
    pub fn decompose(&self) -> Result<Decomposition2D> {
        let det = self.det();
        if det <= 0.0 {
            return Err(Error::UnsupportedOrientation { det });
        }
        let (q, r, a1, a2) = svd_terms(self.a);
        let (sx, sy) = (q + r, q - r);
        let (mut theta1, mut theta2) = if r <= 1e-12 * q { (0.0, a2) } else { ((a2 - a1) / 2.0, (a2 + a1) / 2.0) };
        theta1 = wrap_angle(theta1);
        if theta1 >= std::f64::consts::PI {
            theta1 -= std::f64::consts::PI;
            theta2 += std::f64::consts::PI;
        }
        theta2 = wrap_angle(theta2);
        Ok(Decomposition2D { theta1, sx, sy, theta2, tx: self.t[0], ty: self.t[1] })
    }

    /// `max_{p ∈ [1, n+1]²} ‖(A₁ − A₂)p + (t₁ − t₂)‖₂`.
    ///
    /// The displacement norm is convex in `p`, so the maximum over the square
    /// is attained at a corner.
    pub fn linf_distance(&self, other: &AffineMap2D, n: usize) -> f64 {
        let hi = (n + 1) as f64;
        [[1.0, 1.0], [1.0, hi], [hi, 1.0], [hi, hi]]
            .into_iter()
            .map(|p| {
                let [x1, y1] = self.apply_real(p);
                let [x2, y2] = other.apply_real(p);
                (x1 - x2).hypot(y1 - y2)
            })
            .fold(0.0, f64::max)
    }
}

/// Closed-form 2×2 SVD terms: `A = R(φ) diag(q + r, q − r) R(θ)` with
/// `θ = (a2 − a1)/2`, `φ = (a2 + a1)/2`.
fn svd_terms(a: [[f64; 2]; 2]) -> (f64, f64, f64, f64) {
    let e = (a[0][0] + a[1][1]) / 2.0;
    let f = (a[0][0] - a[1][1]) / 2.0;
    let g = (a[1][0] + a[0][1]) / 2.0;
    let h = (a[1][0] - a[0][1]) / 2.0;
    let q = e.hypot(h);
    let r = f.hypot(g);
    (q, r, g.atan2(f), h.atan2(e))
}

/// `A = R(θ₂) · diag(sx, sy) · R(θ₁)` followed by translation `(tx, ty)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition2D {
    pub theta1: f64,
    pub sx: f64,
    pub sy: f64,
    pub theta2: f64,
    pub tx: f64,
    pub ty: f64,
}

impl Decomposition2D {
    /// Composes the map, checking both scales against `[1/c, c]`.
    pub fn compose(&self, c: f64) -> Result<AffineMap2D> {
        check_scale(self.sx, c, "scale sx")?;
        check_scale(self.sy, c, "scale sy")?;
        Ok(self.compose_unchecked())
    }

    #[inline]
    pub(crate) fn compose_unchecked(&self) -> AffineMap2D {
        let (s1, c1) = self.theta1.sin_cos();
        let (s2, c2) = self.theta2.sin_cos();
        // diag(sx, sy) · R(θ₁)
        let m = [[self.sx * c1, -self.sx * s1], [self.sy * s1, self.sy * c1]];
        let a = [
            [c2 * m[0][0] - s2 * m[1][0], c2 * m[0][1] - s2 * m[1][1]],
            [s2 * m[0][0] + c2 * m[1][0], s2 * m[0][1] + c2 * m[1][1]],
        ];
        AffineMap2D { a, t: [self.tx, self.ty] }
    }
}
