//! Level-set reduction of grayscale matching to binary volume matching.
//!
//! A grayscale image `M` becomes the volume `M′(i, j, k) = 1` iff
//! `M(i, j) ≥ k/n`, so column `(i, j)` holds `⌊n·M(i, j)⌋` ones at the
//! bottom. A pair `(T, L)` of planar map and intensity map corresponds to the
//! restricted volume map with planar part `T`, `zscale = con` and
//! `zshift = bri·n`.
//!
//! The grayscale matcher samples pixels of the grayscale images directly;
//! the volumes are only used to check that both views agree.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cover::{better, Cover3DRestricted, CoverParams, Family2D};
use crate::error::{Error, Result};
use crate::image::{check_same_side, BinaryImage3D, GrayImage2D, MeteredImage, Pixel, Voxel};
use crate::matcher::{median, MatchParams, SampleBudget};
use crate::rng;
use crate::transform::{AffineMap2D, IntensityMap, RestrictedMap3D};

/// Column height of value `v`: the number of `k ∈ {1, …, n}` with `v ≥ k/n`.
#[inline]
pub fn level(v: f64, n: usize) -> usize {
    (1..=n).take_while(|&k| v >= k as f64 / n as f64).count()
}

pub fn reduce_to_3d(m: &GrayImage2D) -> BinaryImage3D {
    let n = m.n();
    let heights: Vec<usize> = m.as_slice().iter().map(|&v| level(v, n)).collect();
    BinaryImage3D::from_fn(n, |v| v.k <= heights[(v.i - 1) * n + (v.j - 1)]).expect("side already validated")
}

/// `Δ_{T,L}(M₁, M₂)`: pixels mapped outside count 1, the others
/// `|M₁(p) − L(M₂(T(p)))|`, averaged over all pixels.
pub fn distance_tl(m1: &GrayImage2D, m2: &GrayImage2D, t: &AffineMap2D, l: &IntensityMap) -> Result<f64> {
    check_same_side(m1.n(), m2.n())?;
    let n = m1.n();
    let sum: f64 = Pixel::all(n)
        .map(|p| match t.apply_image(p, n) {
            Some(q) => (m1.get(p) - l.apply(m2.get(q))).abs(),
            None => 1.0,
        })
        .sum();
    Ok(sum / (n * n) as f64)
}

pub fn lift_transform(t: &AffineMap2D, l: &IntensityMap, n: usize) -> RestrictedMap3D {
    RestrictedMap3D { planar: *t, zscale: l.con, zshift: l.bri * n as f64 }
}

/// Inverse of [`lift_transform`].
pub fn unlift_transform(m: &RestrictedMap3D, n: usize) -> (AffineMap2D, IntensityMap) {
    (m.planar, IntensityMap::new(m.zscale, m.zshift / n as f64))
}

/// Number of ones in a column of a volume.
fn column_height(v: &BinaryImage3D, p: Pixel) -> usize {
    (1..=v.n()).filter(|&k| v.get(Voxel::new(p.i, p.j, k)) == 1).count()
}

/// Height of a column of `h` ones after the third-coordinate part of `m`.
///
/// The column stands for the values in `[h/n, (h+1)/n)`; its midpoint is
/// mapped and quantized down again, clamped into `{0, …, n}`.
#[inline]
pub fn lifted_height(h: usize, m: &RestrictedMap3D, n: usize) -> usize {
    let top = (m.zscale * (h as f64 + 0.5) + m.zshift).floor();
    top.clamp(0.0, n as f64) as usize
}

/// Column-mismatch distance of two volumes under a restricted map.
///
/// Column `p` of `V₁` is compared with column `T(p)` of `V₂` after its height
/// went through [`lifted_height`]; a column contributes
/// `|h₁ − h₂′|/n`, or 1 when `T(p)` leaves the image. The total is averaged
/// over the `n²` columns.
pub fn lifted_distance(v1: &BinaryImage3D, v2: &BinaryImage3D, m: &RestrictedMap3D) -> Result<f64> {
    check_same_side(v1.n(), v2.n())?;
    let n = v1.n();
    let sum: f64 = Pixel::all(n)
        .map(|p| match m.planar.apply_image(p, n) {
            Some(q) => {
                let h1 = column_height(v1, p);
                let h2 = lifted_height(column_height(v2, q), m, n);
                h1.abs_diff(h2) as f64 / n as f64
            }
            None => 1.0,
        })
        .sum();
    Ok(sum / (n * n) as f64)
}

/// Both sides of the reduction for one pair `(T, L)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Consistency {
    pub gray: f64,
    pub vol: f64,
    pub gap: f64,
}

/// Compares `Δ_{T,L}` on the grayscale images with [`lifted_distance`] on
/// their reductions.
///
/// Each column differs by less than `(1 + con/2)/n`: the two floors lose
/// under `1/n` each in opposite directions and the midpoint convention
/// moves the mapped value by at most `con/(2n)`. For `con ≤ 2` the gap is
/// below `2/n`.
pub fn reduction_consistency(
    m1: &GrayImage2D,
    m2: &GrayImage2D,
    t: &AffineMap2D,
    l: &IntensityMap,
) -> Result<Consistency> {
    let gray = distance_tl(m1, m2, t, l)?;
    let vol = lifted_distance(&reduce_to_3d(m1), &reduce_to_3d(m2), &lift_transform(t, l, m1.n()))?;
    Ok(Consistency { gray, vol, gap: (gray - vol).abs() })
}

/// The chosen pair `(T, L)` with its estimated distance and query count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrayMatchResult {
    pub transform: AffineMap2D,
    pub intensity: IntensityMap,
    pub estimated_distance: f64,
    pub queries_used: u64,
    pub member_index: Option<u64>,
    pub params: MatchParams,
}

/// Grayscale matcher over the restricted family with a full affine planar part.
pub fn match_grayscale(
    m1: &GrayImage2D,
    m2: &GrayImage2D,
    delta_prime: f64,
    epsilon: f64,
    c: f64,
    seed: u64,
) -> Result<GrayMatchResult> {
    match_grayscale_family(m1, m2, CoverParams::new(m1.n(), delta_prime, c)?, Family2D::Affine, epsilon, seed)
}

pub fn match_grayscale_family(
    m1: &GrayImage2D,
    m2: &GrayImage2D,
    params: CoverParams,
    planar: Family2D,
    epsilon: f64,
    seed: u64,
) -> Result<GrayMatchResult> {
    check_same_side(m1.n(), m2.n())?;
    let cover = Cover3DRestricted::build_family(params, planar)?;
    match_grayscale_over(m1, m2, &cover, epsilon, seed)
}

const Z_CHUNK: u64 = 256;

/// Searches `cover`, reading member `(T, L)` as a planar map and an
/// intensity map.
///
/// Repetition `r` samples pixels of `M₁` from `derive_seed(seed, r)`. Each
/// planar member probes `M₂` once per sampled pixel, and the probed values
/// serve every intensity member, so `M₂` is read `m·s` times per planar
/// member and `M₁` `m·s` times in total.
pub fn match_grayscale_over(
    m1: &GrayImage2D,
    m2: &GrayImage2D,
    cover: &Cover3DRestricted,
    epsilon: f64,
    seed: u64,
) -> Result<GrayMatchResult> {
    check_same_side(m1.n(), m2.n())?;
    let n = m1.n();
    let p = cover.params();
    if p.n != n {
        return Err(Error::domain(format!("cover built for n = {}, images have n = {n}", p.n)));
    }
    if cover.is_empty() {
        return Err(Error::domain("empty cover"));
    }
    let budget = SampleBudget::for_cover(epsilon, cover.len() as u128)?;
    let s = budget.per_estimate_samples;
    let (a, b) = (MeteredImage::new(m1), MeteredImage::new(m2));

    let draws: Vec<(Vec<Pixel>, Vec<f64>)> = (0..budget.reps)
        .map(|r| {
            let mut g = rng::stream(rng::derive_seed(seed, r as u64));
            let mut tally = a.tally();
            (0..s)
                .map(|_| {
                    let q = a.coord_at(rng::sample_index(a.cells(), &mut g));
                    (q, tally.read(q))
                })
                .unzip()
        })
        .collect();
    let intensities: Vec<IntensityMap> = (0..cover.z_len()).map(|z| cover.intensity(z)).collect();
    let z_len = cover.z_len();

    let (idx, est) = (0..cover.planar().len())
        .into_par_iter()
        .map(|pi| {
            let t = cover.planar().member(pi);
            let mut tally = b.tally();
            // Per repetition: M₁ values of in-image samples, their M₂ values,
            // and the number of samples mapped outside.
            let probed: Vec<(Vec<f64>, Vec<f64>, usize)> = draws
                .iter()
                .map(|(coords, values)| {
                    let (mut v1, mut v2, mut out) = (Vec::with_capacity(s), Vec::with_capacity(s), 0);
                    for (&q, &v) in coords.iter().zip(values) {
                        match tally.probe(t.apply_image(q, n)) {
                            Some(w) => {
                                v1.push(v);
                                v2.push(w);
                            }
                            None => out += 1,
                        }
                    }
                    (v1, v2, out)
                })
                .collect();
            drop(tally);
            (0..z_len.div_ceil(Z_CHUNK))
                .into_par_iter()
                .map(|c| {
                    (c * Z_CHUNK..((c + 1) * Z_CHUNK).min(z_len))
                        .map(|z| {
                            let l = intensities[z as usize];
                            let reps = probed
                                .iter()
                                .map(|(v1, v2, out)| {
                                    let inside: f64 = v1.iter().zip(v2).map(|(&x, &w)| (x - l.apply(w)).abs()).sum();
                                    (inside + *out as f64) / s as f64
                                })
                                .collect();
                            (pi * z_len + z, median(reps))
                        })
                        .reduce(better)
                        .expect("non-empty chunk")
                })
                .reduce_with(better)
                .expect("non-empty intensity grid")
        })
        .reduce_with(better)
        .expect("non-empty cover");

    let (pi, z) = cover.split(idx);
    Ok(GrayMatchResult {
        transform: cover.planar().member(pi),
        intensity: cover.intensity(z),
        estimated_distance: est,
        queries_used: a.reads() + b.reads(),
        member_index: Some(idx),
        params: MatchParams {
            delta_prime: Some(p.delta_prime),
            epsilon,
            c: Some(p.c),
            seed,
            reps: budget.reps,
            samples_per_estimate: s,
            candidates: cover.len(),
            strict_paper: false,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::random_in_family_2d;
    use crate::image::perimeter_binary_3d;
    use crate::image::perimeter_gray;
    use crate::synth;
    use rand::Rng;

    fn constant(n: usize, v: f64) -> GrayImage2D {
        GrayImage2D::new(n, vec![v; n * n]).unwrap()
    }

    #[test]
    fn reduction_examples() {
        assert_eq!(reduce_to_3d(&constant(5, 1.0)).count_ones(), 125);
        assert_eq!(reduce_to_3d(&constant(5, 0.0)).count_ones(), 0);
        let v = reduce_to_3d(&constant(4, 0.5));
        for k in 1..=4 {
            assert_eq!(v.get(Voxel::new(2, 3, k)), u8::from(k <= 2));
        }
    }

    #[test]
    fn reduced_columns_are_monotone_with_floor_heights() {
        let mut g = rng::stream(3);
        let m = GrayImage2D::from_fn(12, |_| g.random::<f64>()).unwrap();
        let v = reduce_to_3d(&m);
        for p in Pixel::all(12) {
            let h = (m.get(p) * 12.0).floor() as usize;
            for k in 1..=12 {
                assert_eq!(v.get(Voxel::new(p.i, p.j, k)), u8::from(k <= h), "{p:?} k={k}");
            }
        }
    }

    #[test]
    fn distance_tl_examples() {
        let m = synth::ramp(8);
        let id = AffineMap2D::identity();
        assert_eq!(distance_tl(&m, &m, &id, &IntensityMap::identity()).unwrap(), 0.0);
        assert_eq!(distance_tl(&constant(8, 0.0), &m, &id, &IntensityMap::new(1.0, 1.0)).unwrap(), 1.0);
        assert_eq!(distance_tl(&constant(8, 0.25), &constant(8, 0.5), &id, &IntensityMap::new(0.5, 0.0)).unwrap(), 0.0);
        assert!(distance_tl(&m, &constant(9, 0.0), &id, &IntensityMap::identity()).is_err());
    }

    #[test]
    fn lift_examples() {
        let id = AffineMap2D::identity();
        assert_eq!(lift_transform(&id, &IntensityMap::identity(), 8), RestrictedMap3D::identity());
        let m = lift_transform(&id, &IntensityMap::new(1.0, 0.25), 8);
        assert_eq!((m.zscale, m.zshift), (1.0, 2.0));
        let m = lift_transform(&id, &IntensityMap::new(2.0, -1.0), 16);
        assert_eq!((m.zscale, m.zshift), (2.0, -16.0));
        assert_eq!(unlift_transform(&m, 16).1, IntensityMap::new(2.0, -1.0));
    }

    #[test]
    fn consistency_examples() {
        let m = synth::ramp(16);
        let r = reduction_consistency(&m, &m, &AffineMap2D::identity(), &IntensityMap::identity()).unwrap();
        assert_eq!(r.gap, 0.0);
        let r = reduction_consistency(
            &constant(64, 0.5),
            &constant(64, 0.25),
            &AffineMap2D::identity(),
            &IntensityMap::new(2.0, 0.0),
        )
        .unwrap();
        assert!(r.gap <= 2.0 / 64.0, "{r:?}");
    }

    #[test]
    fn consistency_gap_below_two_over_n() {
        let n = 16;
        let mut g = rng::stream(11);
        for _ in 0..100 {
            let m1 = GrayImage2D::from_fn(n, |_| g.random::<f64>()).unwrap();
            let m2 = GrayImage2D::from_fn(n, |_| g.random::<f64>()).unwrap();
            let t = random_in_family_2d(&mut g, Family2D::Affine, n, 2.0);
            let l = IntensityMap::new(g.random_range(0.5..=2.0), g.random_range(-2.0..=1.0));
            let r = reduction_consistency(&m1, &m2, &t, &l).unwrap();
            assert!(r.gap <= 2.0 / n as f64 + 1e-9, "{r:?}");
        }
    }

    #[test]
    fn volume_perimeter_relation() {
        let n = 16;
        let mut g = rng::stream(5);
        for _ in 0..10 {
            let m = synth::random_smooth_gray(&mut g, n, 0.0, 1.0);
            let pm = perimeter_gray(&m);
            let pv = perimeter_binary_3d(&reduce_to_3d(&m)) as f64;
            let nf = n as f64;
            assert!(pv <= 8.0 * (nf * nf + pm * nf), "{pv} vs {pm}");
            assert!(pv >= (nf * nf).max(pm * nf) / 8.0, "{pv} vs {pm}");
        }
    }

    #[test]
    fn minima_over_corresponding_grids_agree() {
        let n = 8;
        let mut g = rng::stream(17);
        let m1 = synth::random_smooth_gray(&mut g, n, 0.25, 0.75);
        let m2 = m1.map_values(|v| 2.0 * v - 0.5).unwrap();
        let cover =
            Cover3DRestricted::build_family(CoverParams::new(n, 1.0, 2.0).unwrap(), Family2D::Translation).unwrap();
        let (v1, v2) = (reduce_to_3d(&m1), reduce_to_3d(&m2));
        let (mut gray, mut vol) = (f64::INFINITY, f64::INFINITY);
        for idx in 0..cover.len() {
            let m = cover.member(idx);
            let (t, l) = unlift_transform(&m, n);
            gray = gray.min(distance_tl(&m1, &m2, &t, &l).unwrap());
            vol = vol.min(lifted_distance(&v1, &v2, &m).unwrap());
        }
        assert!((gray - vol).abs() <= 2.0 / n as f64, "{gray} vs {vol}");
    }

    fn planted_pair(seed: u64, n: usize) -> (GrayImage2D, GrayImage2D) {
        let mut g = rng::stream(seed);
        let m1 = synth::random_smooth_gray(&mut g, n, 0.25, 0.75);
        let m2 = m1.map_values(|v| 2.0 * v - 0.5).unwrap();
        (m1, m2)
    }

    #[test]
    fn identity_pair_is_recovered() {
        let (m, _) = planted_pair(1, 32);
        let p = CoverParams::new(32, 0.6, 2.0).unwrap();
        let r = match_grayscale_family(&m, &m, p, Family2D::Identity, 0.1, 4).unwrap();
        assert!(r.estimated_distance <= 0.1, "{r:?}");
        assert!(distance_tl(&m, &m, &r.transform, &r.intensity).unwrap() <= 0.1);
    }

    #[test]
    fn planted_intensity_is_recovered() {
        let (m1, m2) = planted_pair(2, 32);
        let planted = distance_tl(&m1, &m2, &AffineMap2D::identity(), &IntensityMap::new(0.5, 0.25)).unwrap();
        assert!(planted < 1e-12);
        let p = CoverParams::new(32, 0.6, 2.0).unwrap();
        let r = match_grayscale_family(&m1, &m2, p, Family2D::Identity, 0.1, 9).unwrap();
        let exact = distance_tl(&m1, &m2, &r.transform, &r.intensity).unwrap();
        assert!(exact <= 0.1 + 0.1, "{r:?} exact {exact}");
    }

    #[test]
    fn query_count_matches_formula_and_ignores_n() {
        let p = |n| CoverParams::new(n, 1.0, 2.0).unwrap();
        let runs: Vec<GrayMatchResult> = [16, 64]
            .into_iter()
            .map(|n| {
                let (m1, m2) = planted_pair(6, n);
                match_grayscale_family(&m1, &m2, p(n), Family2D::Translation, 0.2, 1).unwrap()
            })
            .collect();
        let cover = Cover3DRestricted::build_family(p(16), Family2D::Translation).unwrap();
        let b = SampleBudget::for_cover(0.2, cover.len() as u128).unwrap();
        let expected = (b.reps * b.per_estimate_samples) as u64 * (1 + cover.planar().len());
        assert_eq!(runs[0].queries_used, expected);
        assert_eq!(runs[1].queries_used, expected);
    }

    #[test]
    fn result_is_deterministic() {
        let (m1, m2) = planted_pair(8, 16);
        let p = CoverParams::new(16, 1.0, 2.0).unwrap();
        let a = match_grayscale_family(&m1, &m2, p, Family2D::Translation, 0.2, 3).unwrap();
        let b = match_grayscale_family(&m1, &m2, p, Family2D::Translation, 0.2, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn affine_planar_cover_hits_the_capacity() {
        let m = synth::ramp(16);
        assert!(matches!(match_grayscale(&m, &m, 0.5, 0.1, 2.0, 0), Err(Error::Capacity { .. })));
    }
}
