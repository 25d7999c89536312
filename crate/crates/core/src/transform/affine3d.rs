use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::{check_scale, floor_in_range, wrap_angle, AffineMap2D, SINGULAR_TOL};
use crate::error::{Error, Result};
use crate::image::{Pixel, Voxel};

/// A real affine map of space, `x ↦ Ax + t`, with non-singular `A`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineMap3D {
    a: [[f64; 3]; 3],
    t: [f64; 3],
}

impl AffineMap3D {
    pub fn new(a: [[f64; 3]; 3], t: [f64; 3]) -> Result<Self> {
        if a.iter().flatten().chain(&t).any(|v| !v.is_finite()) {
            return Err(Error::domain("affine map has non-finite entries"));
        }
        let m = Self { a, t };
        if m.det().abs() <= SINGULAR_TOL {
            return Err(Error::domain(format!("matrix {a:?} is singular")));
        }
        Ok(m)
    }

    pub const fn identity() -> Self {
        Self { a: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], t: [0.0; 3] }
    }

    pub const fn translation(t: [f64; 3]) -> Self {
        Self { a: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], t }
    }

    pub fn all_out(n: usize) -> Self {
        Self::translation([n as f64; 3])
    }

    pub fn matrix(&self) -> [[f64; 3]; 3] {
        self.a
    }

    pub fn translation_part(&self) -> [f64; 3] {
        self.t
    }

    fn na(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|r, c| self.a[r][c])
    }

    pub fn det(&self) -> f64 {
        self.na().determinant()
    }

    #[inline]
    pub fn apply_real(&self, x: [f64; 3]) -> [f64; 3] {
        let a = &self.a;
        [
            a[0][0] * x[0] + a[0][1] * x[1] + a[0][2] * x[2] + self.t[0],
            a[1][0] * x[0] + a[1][1] * x[1] + a[1][2] * x[2] + self.t[1],
            a[2][0] * x[0] + a[2][1] * x[1] + a[2][2] * x[2] + self.t[2],
        ]
    }

    #[inline]
    pub fn apply_image(&self, v: Voxel, n: usize) -> Option<Voxel> {
        let [x, y, z] = self.apply_real([v.i as f64, v.j as f64, v.k as f64]);
        Some(Voxel::new(floor_in_range(x, n)?, floor_in_range(y, n)?, floor_in_range(z, n)?))
    }

    /// Singular values of `A`, largest first.
    pub fn singular_values(&self) -> [f64; 3] {
        let mut s: Vec<f64> = self.na().singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        [s[0], s[1], s[2]]
    }

    pub fn validate_scaling(&self, c: f64) -> Result<()> {
        self.singular_values().iter().try_for_each(|&s| check_scale(s, c, "singular value"))
    }

    /// `A = R(rot2) · diag(scales) · R(rot1)` from an SVD with proper rotations.
    pub fn decompose(&self) -> Result<Decomposition3D> {
        let det = self.det();
        if det <= 0.0 {
            return Err(Error::UnsupportedOrientation { det });
        }
        let svd = self.na().svd(true, true);
        let (u, v_t) = match (svd.u, svd.v_t) {
            (Some(u), Some(v_t)) => (u, v_t),
            _ => return Err(Error::domain("SVD did not converge")),
        };
        let mut order = [0usize, 1, 2];
        order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
        let mut u = Matrix3::from_fn(|r, c| u[(r, order[c])]);
        let mut v_t = Matrix3::from_fn(|r, c| v_t[(order[r], c)]);
        let scales = [svd.singular_values[order[0]], svd.singular_values[order[1]], svd.singular_values[order[2]]];
        if u.determinant() < 0.0 {
            // det A > 0 forces det U = det Vᵀ, so flip both.
            u.column_mut(2).neg_mut();
            v_t.row_mut(2).neg_mut();
        }
        Ok(Decomposition3D { rot1: euler_from_matrix(&v_t), scales, rot2: euler_from_matrix(&u), t: self.t })
    }

    /// Maximum displacement over the eight corners of `[1, n+1]³`.
    pub fn linf_distance(&self, other: &AffineMap3D, n: usize) -> f64 {
        let hi = (n + 1) as f64;
        let mut best: f64 = 0.0;
        for x in [1.0, hi] {
            for y in [1.0, hi] {
                for z in [1.0, hi] {
                    let (p, q) = (self.apply_real([x, y, z]), other.apply_real([x, y, z]));
                    let d = Vector3::new(p[0] - q[0], p[1] - q[1], p[2] - q[2]).norm();
                    best = best.max(d);
                }
            }
        }
        best
    }
}

/// `Rz(α) · Ry(β) · Rx(γ)` for Euler angles `[α, β, γ]`.
pub(crate) fn rotation_from_euler(e: [f64; 3]) -> [[f64; 3]; 3] {
    let (sa, ca) = e[0].sin_cos();
    let (sb, cb) = e[1].sin_cos();
    let (sg, cg) = e[2].sin_cos();
    [
        [ca * cb, ca * sb * sg - sa * cg, ca * sb * cg + sa * sg],
        [sa * cb, sa * sb * sg + ca * cg, sa * sb * cg - ca * sg],
        [-sb, cb * sg, cb * cg],
    ]
}

/// Inverse of [`rotation_from_euler`], with `α, γ ∈ [0, 2π)` and `β ∈ [−π/2, π/2]`.
fn euler_from_matrix(r: &Matrix3<f64>) -> [f64; 3] {
    let sb = (-r[(2, 0)]).clamp(-1.0, 1.0);
    let beta = sb.asin();
    if beta.cos() > 1e-9 {
        let alpha = r[(1, 0)].atan2(r[(0, 0)]);
        let gamma = r[(2, 1)].atan2(r[(2, 2)]);
        [wrap_angle(alpha), beta, wrap_angle(gamma)]
    } else {
        // Gimbal lock: only α ∓ γ is determined; put it all in γ.
        let gamma = (sb.signum() * r[(0, 1)]).atan2(r[(1, 1)]);
        [0.0, beta, wrap_angle(gamma)]
    }
}

/// `A = R(rot2) · diag(scales) · R(rot1)` followed by translation `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition3D {
    pub rot1: [f64; 3],
    pub scales: [f64; 3],
    pub rot2: [f64; 3],
    pub t: [f64; 3],
}

impl Decomposition3D {
    pub fn compose(&self, c: f64) -> Result<AffineMap3D> {
        for s in self.scales {
            check_scale(s, c, "scale")?;
        }
        Ok(self.compose_unchecked())
    }

    pub(crate) fn compose_unchecked(&self) -> AffineMap3D {
        let r1 = rotation_from_euler(self.rot1);
        let r2 = rotation_from_euler(self.rot2);
        let mut a = [[0.0; 3]; 3];
        for (r, row) in a.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| r2[r][k] * self.scales[k] * r1[k][c]).sum();
            }
        }
        AffineMap3D { a, t: self.t }
    }
}

/// A planar affine map on `(i, j)` combined with scale and shift on `k`.
///
/// Acts on a voxel as `(⌊planar(i, j)⌋, ⌊zscale·k + zshift⌋)`; the third
/// coordinate is truncated into `{1, …, n}` rather than leaving the volume.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestrictedMap3D {
    pub planar: AffineMap2D,
    pub zscale: f64,
    pub zshift: f64,
}

impl RestrictedMap3D {
    pub const fn identity() -> Self {
        Self { planar: AffineMap2D::identity(), zscale: 1.0, zshift: 0.0 }
    }

    pub fn validate(&self, c: f64) -> Result<()> {
        self.planar.validate_scaling(c)?;
        check_scale(self.zscale, c, "zscale")
    }

    pub fn apply_image(&self, v: Voxel, n: usize) -> Option<Voxel> {
        let p = self.planar.apply_image(Pixel::new(v.i, v.j), n)?;
        let k = (self.zscale * v.k as f64 + self.zshift).floor();
        let k = k.clamp(1.0, n as f64) as usize;
        Some(Voxel::new(p.i, p.j, k))
    }

    /// The block-diagonal 3D affine map with the same real action.
    pub fn to_affine(&self) -> AffineMap3D {
        let a = self.planar.matrix();
        let t = self.planar.translation_part();
        AffineMap3D {
            a: [[a[0][0], a[0][1], 0.0], [a[1][0], a[1][1], 0.0], [0.0, 0.0, self.zscale]],
            t: [t[0], t[1], self.zshift],
        }
    }

    /// l∞ⁿ distance of the underlying real maps over `[1, n+1]³`.
    pub fn linf_distance(&self, other: &RestrictedMap3D, n: usize) -> f64 {
        self.to_affine().linf_distance(&other.to_affine(), n)
    }
}
