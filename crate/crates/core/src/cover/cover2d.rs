use std::f64::consts::{SQRT_2, TAU};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{argmin_par, argmin_seq, Certificate, CoverParams, Grid1D, ProductGrid};
use crate::error::{Error, Result};
use crate::rng;
use crate::transform::{AffineMap2D, Decomposition2D};

/// Which planar maps a cover ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family2D {
    /// All orientation-preserving maps with singular values in `[1/c, c]`.
    Affine,
    /// Pure translations `x ↦ x + t`.
    Translation,
    /// Only the identity.
    Identity,
}

impl Family2D {
    /// Translation range per axis, covering every map of the family that
    /// keeps at least one pixel inside the image.
    ///
    /// For the affine family `|(Ap)ₓ| ≤ c‖p‖ ≤ √2·c·n` over pixels, so a map
    /// keeping pixel `p` needs `tₓ ∈ (1 − √2cn, n + 1 + √2cn)`.
    fn translation_range(self, n: f64, c: f64) -> (f64, f64) {
        match self {
            Family2D::Affine => (-SQRT_2 * c * n, (2.0 + SQRT_2 * c) * n),
            Family2D::Translation => (-n, n),
            Family2D::Identity => (0.0, 0.0),
        }
    }
}

/// A δ′n-cover of a planar family, enumerated lazily.
///
/// Affine members are indexed over the axes `(θ₁, sx, sy, θ₂, tx, ty)`,
/// translation members over `(tx, ty)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cover2D {
    params: CoverParams,
    family: Family2D,
    grid: ProductGrid,
    len: u64,
}

impl Cover2D {
    pub fn build(params: CoverParams) -> Result<Self> {
        Self::build_family(params, Family2D::Affine)
    }

    pub fn build_family(params: CoverParams, family: Family2D) -> Result<Self> {
        params.validate()?;
        let grid = Self::grid_for(&params, family);
        let len = grid.check_capacity(params.cap)?;
        Ok(Self { params, family, grid, len })
    }

    fn grid_for(params: &CoverParams, family: Family2D) -> ProductGrid {
        let (n, c, delta) = (params.n as f64, params.c, params.delta());
        let (lo, hi) = family.translation_range(n, c);
        let t_step = SQRT_2 * delta * n;
        let translation = match family {
            Family2D::Identity => Grid1D::single(0.0),
            _ => Grid1D::closed(lo, hi, t_step, 0.0),
        };
        match family {
            Family2D::Affine => {
                let angle = Grid1D::angles(delta / SQRT_2);
                let scale = Grid1D::closed(1.0 / c, c, delta / SQRT_2, 1.0);
                ProductGrid::new(vec![
                    ("theta1", angle),
                    ("sx", scale),
                    ("sy", scale),
                    ("theta2", angle),
                    ("tx", translation),
                    ("ty", translation),
                ])
            }
            Family2D::Translation | Family2D::Identity => {
                ProductGrid::new(vec![("tx", translation), ("ty", translation)])
            }
        }
    }

    pub fn params(&self) -> &CoverParams {
        &self.params
    }

    pub fn family(&self) -> Family2D {
        self.family
    }

    pub fn grid(&self) -> &ProductGrid {
        &self.grid
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn decomposition(&self, idx: u64) -> Decomposition2D {
        let v = self.grid.values(idx as u128);
        match self.family {
            Family2D::Affine => Decomposition2D { theta1: v[0], sx: v[1], sy: v[2], theta2: v[3], tx: v[4], ty: v[5] },
            _ => Decomposition2D { theta1: 0.0, sx: 1.0, sy: 1.0, theta2: 0.0, tx: v[0], ty: v[1] },
        }
    }

    pub fn member(&self, idx: u64) -> AffineMap2D {
        assert!(idx < self.len, "member {idx} out of range (len {})", self.len);
        match self.family {
            Family2D::Affine => self.decomposition(idx).compose_unchecked(),
            _ => {
                let v = self.grid.values(idx as u128);
                AffineMap2D::translation(v[0], v[1])
            }
        }
    }

    pub fn members(&self) -> impl Iterator<Item = AffineMap2D> + '_ {
        (0..self.len).map(|i| self.member(i))
    }

    /// Exhaustive nearest member in l∞ⁿ, lowest index on ties.
    pub fn nearest_member(&self, t: &AffineMap2D) -> Result<(u64, AffineMap2D, f64)> {
        let n = self.params.n;
        let (idx, d) =
            argmin_par(self.len, |i| self.member(i).linf_distance(t, n)).ok_or_else(|| Error::domain("empty cover"))?;
        Ok((idx, self.member(idx), d))
    }

    /// Nearest member among those whose parameters lie within `radius` grid
    /// steps of the snapped decomposition of `t`.
    ///
    /// Cheap even for covers too large to scan; the cover property
    /// guarantees that radius 0 already lands within `δ′n` for in-family maps.
    pub fn snap_member(&self, t: &AffineMap2D, radius: usize) -> Result<(u64, AffineMap2D, f64)> {
        let n = self.params.n;
        let (idx, d) = argmin_seq(self.snap_candidates(t, radius)?, |i| self.member(i).linf_distance(t, n))
            .ok_or_else(|| Error::domain("empty cover"))?;
        Ok((idx, self.member(idx), d))
    }

    /// Member indices within `radius` grid steps of the snapped parameters of `t`.
    pub(crate) fn snap_candidates(&self, t: &AffineMap2D, radius: usize) -> Result<Vec<u64>> {
        let x: Vec<f64> = match self.family {
            Family2D::Affine => {
                let d = t.decompose()?;
                vec![d.theta1, d.sx, d.sy, d.theta2, d.tx, d.ty]
            }
            _ => t.translation_part().to_vec(),
        };
        Ok(self.grid.neighborhood(&x, radius).into_iter().map(|i| i as u64).collect())
    }

    /// The cover with every grid interval halved; a superset of `self`.
    pub fn refined(&self) -> Result<Self> {
        let grid = self.grid.refined();
        let len = grid.check_capacity(self.params.cap)?;
        Ok(Self { params: self.params, family: self.family, grid, len })
    }

    /// Checks the cover property on `samples` random in-family maps.
    pub fn certificate(&self, samples: usize, seed: u64) -> Certificate {
        let p = self.params;
        let distances: Vec<f64> = (0..samples)
            .into_par_iter()
            .map(|s| {
                let mut g = rng::stream(rng::derive_seed(seed, s as u64));
                let t = random_in_family_2d(&mut g, self.family, p.n, p.c);
                self.snap_member(&t, 1).map(|r| r.2).unwrap_or(f64::INFINITY)
            })
            .collect();
        Certificate::from_distances(&distances, p.radius())
    }
}

/// A random map of `family` that keeps at least one pixel inside the image.
pub fn random_in_family_2d<G: Rng>(g: &mut G, family: Family2D, n: usize, c: f64) -> AffineMap2D {
    let (lo, hi) = family.translation_range(n as f64, c);
    loop {
        let t = match family {
            Family2D::Identity => return AffineMap2D::identity(),
            Family2D::Translation => AffineMap2D::translation(g.random_range(lo..=hi), g.random_range(lo..=hi)),
            Family2D::Affine => Decomposition2D {
                theta1: g.random_range(0.0..TAU),
                sx: g.random_range(1.0 / c..=c),
                sy: g.random_range(1.0 / c..=c),
                theta2: g.random_range(0.0..TAU),
                tx: g.random_range(lo..=hi),
                ty: g.random_range(lo..=hi),
            }
            .compose_unchecked(),
        };
        if t.keeps_some_pixel(n) {
            return t;
        }
    }
}
