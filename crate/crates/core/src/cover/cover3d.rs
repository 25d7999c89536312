use std::f64::consts::{FRAC_PI_2, SQRT_2, TAU};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cover2d::random_in_family_2d;
use super::{argmin_par, argmin_seq, Certificate, Cover2D, CoverParams, Family2D, Grid1D, ProductGrid};
use crate::error::{Error, Result};
use crate::image::Voxel;
use crate::rng;
use crate::transform::{AffineMap3D, Decomposition3D, IntensityMap, RestrictedMap3D};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Which volume maps a full 3D cover ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family3D {
    /// All orientation-preserving maps with singular values in `[1/c, c]`.
    Affine,
    /// Pure translations.
    Translation,
}

impl Family3D {
    /// Per-axis translation range; `|(Av)ₓ| ≤ c‖v‖ ≤ √3·c·n` over voxels.
    fn translation_range(self, n: f64, c: f64) -> (f64, f64) {
        match self {
            Family3D::Affine => (-SQRT_3 * c * n, (2.0 + SQRT_3 * c) * n),
            Family3D::Translation => (-n, n),
        }
    }
}

/// A δ′n-cover of a family of volume maps.
///
/// Affine members are indexed over two ZYX Euler-angle triples, three scales
/// and three translations (12 axes); translation members over `(tx, ty, tz)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cover3DFull {
    params: CoverParams,
    family: Family3D,
    grid: ProductGrid,
    len: u128,
}

impl Cover3DFull {
    pub fn build(params: CoverParams) -> Result<Self> {
        Self::build_family(params, Family3D::Affine)
    }

    pub fn build_family(params: CoverParams, family: Family3D) -> Result<Self> {
        params.validate()?;
        let grid = Self::grid_for(&params, family);
        let len = grid.check_capacity_wide(Some(params.cap))?;
        Ok(Self { params, family, grid, len })
    }

    /// A cover that is only ever probed through [`Cover3DFull::snap_member`],
    /// so its size is not capped.
    pub fn build_uncapped(params: CoverParams, family: Family3D) -> Result<Self> {
        params.validate()?;
        let grid = Self::grid_for(&params, family);
        let len = grid.check_capacity_wide(None)?;
        Ok(Self { params, family, grid, len })
    }

    fn grid_for(params: &CoverParams, family: Family3D) -> ProductGrid {
        let (n, c, delta) = (params.n as f64, params.c, params.delta());
        let (lo, hi) = family.translation_range(n, c);
        let t_step = delta * n / SQRT_3;
        let t = Grid1D::closed(lo, hi, t_step, 0.0);
        match family {
            Family3D::Affine => {
                let a_step = delta / (3.0 * SQRT_3);
                let yaw = Grid1D::angles(a_step);
                let pitch = Grid1D::closed(-FRAC_PI_2, FRAC_PI_2, a_step, 0.0);
                let scale = Grid1D::closed(1.0 / c, c, delta / SQRT_3, 1.0);
                ProductGrid::new(vec![
                    ("rot1_z", yaw),
                    ("rot1_y", pitch),
                    ("rot1_x", yaw),
                    ("s1", scale),
                    ("s2", scale),
                    ("s3", scale),
                    ("rot2_z", yaw),
                    ("rot2_y", pitch),
                    ("rot2_x", yaw),
                    ("tx", t),
                    ("ty", t),
                    ("tz", t),
                ])
            }
            Family3D::Translation => ProductGrid::new(vec![("tx", t), ("ty", t), ("tz", t)]),
        }
    }

    pub fn params(&self) -> &CoverParams {
        &self.params
    }

    pub fn family(&self) -> Family3D {
        self.family
    }

    pub fn grid(&self) -> &ProductGrid {
        &self.grid
    }

    pub fn len(&self) -> u128 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn member(&self, idx: u128) -> AffineMap3D {
        assert!(idx < self.len, "member {idx} out of range");
        let v = self.grid.values(idx);
        match self.family {
            Family3D::Affine => Decomposition3D {
                rot1: [v[0], v[1], v[2]],
                scales: [v[3], v[4], v[5]],
                rot2: [v[6], v[7], v[8]],
                t: [v[9], v[10], v[11]],
            }
            .compose_unchecked(),
            Family3D::Translation => AffineMap3D::translation([v[0], v[1], v[2]]),
        }
    }

    /// Exhaustive nearest member; the cover must have fewer than 2⁶⁴ members.
    pub fn nearest_member(&self, t: &AffineMap3D) -> Result<(u128, AffineMap3D, f64)> {
        let len = u64::try_from(self.len).map_err(|_| Error::Capacity { members: self.len, cap: u64::MAX })?;
        let n = self.params.n;
        let (idx, d) = argmin_par(len, |i| self.member(i as u128).linf_distance(t, n))
            .ok_or_else(|| Error::domain("empty cover"))?;
        Ok((idx as u128, self.member(idx as u128), d))
    }

    pub fn snap_member(&self, t: &AffineMap3D, radius: usize) -> Result<(u128, AffineMap3D, f64)> {
        let x: Vec<f64> = match self.family {
            Family3D::Affine => {
                let d = t.decompose()?;
                d.rot1.iter().chain(&d.scales).chain(&d.rot2).chain(&d.t).copied().collect()
            }
            Family3D::Translation => t.translation_part().to_vec(),
        };
        let n = self.params.n;
        let (idx, d) = argmin_seq(self.grid.neighborhood(&x, radius), |i| self.member(i).linf_distance(t, n))
            .ok_or_else(|| Error::domain("empty cover"))?;
        Ok((idx, self.member(idx), d))
    }

    pub fn certificate(&self, samples: usize, seed: u64) -> Certificate {
        let p = self.params;
        let distances: Vec<f64> = (0..samples)
            .into_par_iter()
            .map(|s| {
                let mut g = rng::stream(rng::derive_seed(seed, s as u64));
                let t = random_in_family_3d(&mut g, self.family, p.n, p.c);
                self.snap_member(&t, 0).map(|r| r.2).unwrap_or(f64::INFINITY)
            })
            .collect();
        Certificate::from_distances(&distances, p.radius())
    }
}

/// A random volume map of `family` that keeps at least one voxel inside.
pub fn random_in_family_3d<G: Rng>(g: &mut G, family: Family3D, n: usize, c: f64) -> AffineMap3D {
    let (lo, hi) = family.translation_range(n as f64, c);
    loop {
        let t = [g.random_range(lo..=hi), g.random_range(lo..=hi), g.random_range(lo..=hi)];
        let m = match family {
            Family3D::Translation => AffineMap3D::translation(t),
            Family3D::Affine => {
                let mut euler =
                    || [g.random_range(0.0..TAU), g.random_range(-FRAC_PI_2..=FRAC_PI_2), g.random_range(0.0..TAU)];
                let (rot1, rot2) = (euler(), euler());
                let scales = [g.random_range(1.0 / c..=c), g.random_range(1.0 / c..=c), g.random_range(1.0 / c..=c)];
                Decomposition3D { rot1, scales, rot2, t }.compose_unchecked()
            }
        };
        if Voxel::all(n).any(|v| m.apply_image(v, n).is_some()) {
            return m;
        }
    }
}

/// A δ′n-cover of the restricted family: planar maps combined with a scale
/// and shift of the third coordinate.
///
/// Indexed planar-major: member `idx` has planar index `idx / (N_zscale·N_zshift)`.
/// The third-coordinate steps follow the planar ones: a zscale error of `s`
/// moves `k ≤ n + 1` by at most `s(n+1)`, so zscale uses step `δ/√2`, and
/// zshift uses `δn/√2`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cover3DRestricted {
    planar: Cover2D,
    z: ProductGrid,
    len: u64,
}

impl Cover3DRestricted {
    pub fn build(params: CoverParams) -> Result<Self> {
        Self::build_family(params, Family2D::Affine)
    }

    /// The planar part ranges over `planar`; the third coordinate always over
    /// its full range.
    pub fn build_family(params: CoverParams, planar: Family2D) -> Result<Self> {
        params.validate()?;
        let (n, c, delta) = (params.n as f64, params.c, params.delta());
        let z = ProductGrid::new(vec![
            ("zscale", Grid1D::closed(1.0 / c, c, delta / SQRT_2, 1.0)),
            ("zshift", Grid1D::closed(-c * n, n, delta * n / SQRT_2, 0.0)),
        ]);
        let z_len = z.check_capacity(params.cap)?;
        let planar =
            Cover2D::build_family(params.with_cap(params.cap / z_len.max(1)), planar).map_err(|e| match e {
                Error::Capacity { members, .. } => {
                    Error::Capacity { members: members * z_len as u128, cap: params.cap }
                }
                e => e,
            })?;
        let len = planar.len() * z_len;
        Ok(Self { planar, z, len })
    }

    pub fn params(&self) -> CoverParams {
        let p = *self.planar.params();
        CoverParams { cap: p.cap, ..p }
    }

    pub fn planar(&self) -> &Cover2D {
        &self.planar
    }

    pub fn z_grid(&self) -> &ProductGrid {
        &self.z
    }

    pub fn z_len(&self) -> u64 {
        self.z.size() as u64
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn cardinalities(&self) -> Vec<(&'static str, usize)> {
        let mut c = self.planar.grid().cardinalities();
        c.extend(self.z.cardinalities());
        c
    }

    /// `(planar index, z index)` of member `idx`.
    pub fn split(&self, idx: u64) -> (u64, u64) {
        (idx / self.z_len(), idx % self.z_len())
    }

    pub fn z_values(&self, z_idx: u64) -> (f64, f64) {
        let v = self.z.values(z_idx as u128);
        (v[0], v[1])
    }

    pub fn member(&self, idx: u64) -> RestrictedMap3D {
        assert!(idx < self.len, "member {idx} out of range");
        let (p, z) = self.split(idx);
        let (zscale, zshift) = self.z_values(z);
        RestrictedMap3D { planar: self.planar.member(p), zscale, zshift }
    }

    /// The intensity map a z index stands for: `con = zscale`, `bri = zshift/n`.
    pub fn intensity(&self, z_idx: u64) -> IntensityMap {
        let (zscale, zshift) = self.z_values(z_idx);
        IntensityMap::new(zscale, zshift / self.planar.params().n as f64)
    }

    pub fn nearest_member(&self, t: &RestrictedMap3D) -> Result<(u64, RestrictedMap3D, f64)> {
        let n = self.planar.params().n;
        let (idx, d) =
            argmin_par(self.len, |i| self.member(i).linf_distance(t, n)).ok_or_else(|| Error::domain("empty cover"))?;
        Ok((idx, self.member(idx), d))
    }

    pub fn snap_member(&self, t: &RestrictedMap3D, radius: usize) -> Result<(u64, RestrictedMap3D, f64)> {
        let n = self.planar.params().n;
        let planar = self.planar.snap_candidates(&t.planar, radius)?;
        let z = self.z.neighborhood(&[t.zscale, t.zshift], radius);
        let ids = planar.iter().flat_map(|&p| z.iter().map(move |&z| p * self.z_len() + z as u64));
        let (idx, d) =
            argmin_seq(ids, |i| self.member(i).linf_distance(t, n)).ok_or_else(|| Error::domain("empty cover"))?;
        Ok((idx, self.member(idx), d))
    }

    pub fn certificate(&self, samples: usize, seed: u64) -> Certificate {
        let p = *self.planar.params();
        let family = self.planar.family();
        let distances: Vec<f64> = (0..samples)
            .into_par_iter()
            .map(|s| {
                let mut g = rng::stream(rng::derive_seed(seed, s as u64));
                let t = random_restricted_3d(&mut g, family, p.n, p.c);
                self.snap_member(&t, 1).map(|r| r.2).unwrap_or(f64::INFINITY)
            })
            .collect();
        Certificate::from_distances(&distances, p.radius())
    }
}

/// A random restricted map whose planar part keeps a pixel inside.
pub fn random_restricted_3d<G: Rng>(g: &mut G, planar: Family2D, n: usize, c: f64) -> RestrictedMap3D {
    let planar = random_in_family_2d(g, planar, n, c);
    RestrictedMap3D { planar, zscale: g.random_range(1.0 / c..=c), zshift: g.random_range(-c * n as f64..=n as f64) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, dp: f64, c: f64) -> CoverParams {
        CoverParams::new(n, dp, c).unwrap()
    }

    #[test]
    fn restricted_size_is_planar_times_z() {
        let cov = Cover3DRestricted::build(params(8, 1.2, 2.0).with_cap(u64::MAX)).unwrap();
        let card = cov.cardinalities();
        assert_eq!(card.len(), 8);
        let prod: u64 = card.iter().map(|c| c.1 as u64).product();
        assert_eq!(prod, cov.len());
        assert_eq!(cov.len(), cov.planar().len() * cov.z_len());
    }

    #[test]
    fn restricted_member_decoding() {
        let cov = Cover3DRestricted::build_family(params(16, 0.6, 2.0), Family2D::Translation).unwrap();
        let idx = cov.len() - 1;
        let m = cov.member(idx);
        assert_eq!(m.planar, cov.planar().member(cov.planar().len() - 1));
        assert_eq!((m.zscale, m.zshift), (2.0, 16.0));
        let l = cov.intensity(cov.z_len() - 1);
        assert_eq!((l.con, l.bri), (2.0, 1.0));
        assert_eq!(cov.member(0).zscale, 0.5);
        assert_eq!(cov.member(0).zshift, -32.0);
    }

    #[test]
    fn restricted_identity_and_certificate() {
        let cov = Cover3DRestricted::build_family(params(16, 0.8, 2.0), Family2D::Translation).unwrap();
        let (_, _, d) = cov.snap_member(&RestrictedMap3D::identity(), 1).unwrap();
        assert!(d <= 0.8 * 16.0);
        let cert = cov.certificate(300, 5);
        assert_eq!(cert.failures, 0, "{cert:?}");
        let cov = Cover3DRestricted::build(params(8, 1.0, 2.0).with_cap(u64::MAX)).unwrap();
        let cert = cov.certificate(300, 6);
        assert_eq!(cert.failures, 0, "{cert:?}");
    }

    #[test]
    fn restricted_snap_not_better_than_exhaustive() {
        let cov = Cover3DRestricted::build_family(params(8, 1.2, 2.0), Family2D::Translation).unwrap();
        let mut g = rng::stream(2);
        for _ in 0..10 {
            let t = random_restricted_3d(&mut g, Family2D::Translation, 8, 2.0);
            let exact = cov.nearest_member(&t).unwrap().2;
            let local = cov.snap_member(&t, 1).unwrap().2;
            assert!(exact <= local + 1e-12);
        }
    }

    #[test]
    fn restricted_halving_scales_by_about_256() {
        let a = Cover3DRestricted::build(params(32, 0.8, 2.0).with_cap(u64::MAX)).unwrap().len() as f64;
        let b = Cover3DRestricted::build(params(32, 0.4, 2.0).with_cap(u64::MAX)).unwrap().len() as f64;
        assert!((128.0..=512.0).contains(&(b / a)), "{}", b / a);
    }

    #[test]
    fn full_affine_cover_exceeds_default_cap() {
        assert!(matches!(Cover3DFull::build(params(8, 1.4, 2.0)), Err(Error::Capacity { .. })));
    }

    #[test]
    fn full_identity_and_certificate() {
        let p = params(6, 1.2, 2.0);
        let cov = Cover3DFull::build_uncapped(p, Family3D::Affine).unwrap();
        let (_, _, d) = cov.snap_member(&AffineMap3D::identity(), 0).unwrap();
        assert!(d <= p.radius());
        let cert = cov.certificate(200, 9);
        assert_eq!(cert.failures, 0, "{cert:?}");
    }

    #[test]
    fn full_translation_cover() {
        let p = params(8, 0.8, 2.0);
        let cov = Cover3DFull::build_family(p, Family3D::Translation).unwrap();
        let (_, m, d) = cov.nearest_member(&AffineMap3D::identity()).unwrap();
        assert_eq!((m, d), (AffineMap3D::identity(), 0.0));
        assert_eq!(cov.certificate(200, 4).failures, 0);
    }

    #[test]
    fn full_halving_scales_by_about_4096() {
        // Twelve parameters: two Euler triples, three scales, three translations.
        let a = Cover3DFull::build_uncapped(params(16, 1.0, 2.0), Family3D::Affine).unwrap().len() as f64;
        let b = Cover3DFull::build_uncapped(params(16, 0.5, 2.0), Family3D::Affine).unwrap().len() as f64;
        assert!((2048.0..=8192.0).contains(&(b / a)), "{}", b / a);
    }
}
