use rayon::prelude::*;

use crate::cover::{better, Cover2D, Cover3DFull, CoverParams, Family2D, Family3D};
use crate::error::{Error, Result};
use crate::image::{check_same_side, BinaryImage3D, MeteredImage, Pixel, Raster};
use crate::rng;
use crate::transform::AffineMap3D;

use super::estimate::{draw, median, mismatch_mean, Draw};
use super::{ImageMap, MatchParams, MatchResult, SampleBudget};

const CHUNK: u64 = 64;

/// Median-of-`m` estimates for every candidate, returning the lowest-index
/// minimizer.
///
/// All candidates share the same `m` sample sets (repetition `r` draws from
/// `derive_seed(seed, r)`), so the estimate of candidate `i` is exactly
/// `estimate_distance_median(M₁, M₂, member(i), budget, seed)`, while `M₁` is
/// read only `m·s` times.
pub(crate) fn cover_search<R, M, F>(
    m1: &MeteredImage<R>,
    m2: &MeteredImage<R>,
    len: u64,
    member: F,
    budget: &SampleBudget,
    seed: u64,
) -> (u64, f64)
where
    R: Raster,
    M: ImageMap<R::Coord>,
    F: Fn(u64) -> M + Sync,
{
    let draws: Vec<Draw<R::Coord>> =
        (0..budget.reps).map(|r| draw(m1, budget.per_estimate_samples, rng::derive_seed(seed, r as u64))).collect();
    let n = m2.side();
    (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut tally = m2.tally();
            (c * CHUNK..((c + 1) * CHUNK).min(len))
                .map(|i| {
                    let t = member(i);
                    let est = median(draws.iter().map(|d| mismatch_mean(&mut tally, &t, n, d)).collect());
                    (i, est)
                })
                .reduce(better)
                .expect("non-empty chunk")
        })
        .reduce_with(better)
        .expect("non-empty cover")
}

fn check_cover_side(cover_n: usize, image_n: usize) -> Result<()> {
    if cover_n == image_n {
        Ok(())
    } else {
        Err(Error::domain(format!("cover built for n = {cover_n}, images have n = {image_n}")))
    }
}

/// Smooth-image matcher over the full affine family.
///
/// The affine cover is enormous even at coarse resolution, so with the
/// default capacity this usually fails with a capacity error; see
/// [`match_smooth_family`] for the translation family.
pub fn match_smooth<R: Raster<Coord = Pixel>>(
    m1: &R,
    m2: &R,
    delta_prime: f64,
    epsilon: f64,
    c: f64,
    seed: u64,
) -> Result<MatchResult> {
    match_smooth_family(m1, m2, CoverParams::new(m1.side(), delta_prime, c)?, Family2D::Affine, epsilon, seed)
}

pub fn match_smooth_family<R: Raster<Coord = Pixel>>(
    m1: &R,
    m2: &R,
    params: CoverParams,
    family: Family2D,
    epsilon: f64,
    seed: u64,
) -> Result<MatchResult> {
    check_same_side(m1.side(), m2.side())?;
    let cover = Cover2D::build_family(params, family)?;
    match_smooth_over(m1, m2, &cover, epsilon, seed)
}

/// Searches `cover` with median-amplified estimates, `m = max(1, ⌈C_m·ln ℓ⌉)`.
pub fn match_smooth_over<R: Raster<Coord = Pixel>>(
    m1: &R,
    m2: &R,
    cover: &Cover2D,
    epsilon: f64,
    seed: u64,
) -> Result<MatchResult> {
    check_same_side(m1.side(), m2.side())?;
    check_cover_side(cover.params().n, m1.side())?;
    if cover.is_empty() {
        return Err(Error::domain("empty cover"));
    }
    let budget = SampleBudget::for_cover(epsilon, cover.len() as u128)?;
    let (a, b) = (MeteredImage::new(m1), MeteredImage::new(m2));
    let (idx, est) = cover_search(&a, &b, cover.len(), |i| cover.member(i), &budget, seed);
    let p = cover.params();
    Ok(MatchResult {
        transform: cover.member(idx),
        estimated_distance: est,
        queries_used: a.reads() + b.reads(),
        member_index: Some(idx),
        params: MatchParams {
            delta_prime: Some(p.delta_prime),
            epsilon,
            c: Some(p.c),
            seed,
            reps: budget.reps,
            samples_per_estimate: budget.per_estimate_samples,
            candidates: cover.len(),
            strict_paper: false,
        },
    })
}

/// 3D analogue of [`match_smooth`] over the full affine family of volumes.
pub fn match_smooth_3d(
    m1: &BinaryImage3D,
    m2: &BinaryImage3D,
    delta_prime: f64,
    epsilon: f64,
    c: f64,
    seed: u64,
) -> Result<MatchResult<AffineMap3D>> {
    let cover = Cover3DFull::build_family(CoverParams::new(m1.n(), delta_prime, c)?, Family3D::Affine)?;
    match_smooth_3d_over(m1, m2, &cover, epsilon, seed)
}

pub fn match_smooth_3d_over(
    m1: &BinaryImage3D,
    m2: &BinaryImage3D,
    cover: &Cover3DFull,
    epsilon: f64,
    seed: u64,
) -> Result<MatchResult<AffineMap3D>> {
    check_same_side(m1.n(), m2.n())?;
    check_cover_side(cover.params().n, m1.n())?;
    let len = u64::try_from(cover.len()).map_err(|_| Error::Capacity { members: cover.len(), cap: u64::MAX })?;
    if len == 0 {
        return Err(Error::domain("empty cover"));
    }
    let budget = SampleBudget::for_cover(epsilon, cover.len())?;
    let (a, b) = (MeteredImage::new(m1), MeteredImage::new(m2));
    let (idx, est) = cover_search(&a, &b, len, |i| cover.member(i as u128), &budget, seed);
    let p = cover.params();
    Ok(MatchResult {
        transform: cover.member(idx as u128),
        estimated_distance: est,
        queries_used: a.reads() + b.reads(),
        member_index: Some(idx),
        params: MatchParams {
            delta_prime: Some(p.delta_prime),
            epsilon,
            c: Some(p.c),
            seed,
            reps: budget.reps,
            samples_per_estimate: budget.per_estimate_samples,
            candidates: len,
            strict_paper: false,
        },
    })
}
