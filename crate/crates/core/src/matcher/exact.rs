use serde::{Deserialize, Serialize};

use crate::cover::{argmin_par, Cover2D, CoverParams};
use crate::error::{Error, Result};
use crate::image::{check_same_side, BinaryImage2D, Pixel, Raster};
use crate::transform::AffineMap2D;

use super::ImageMap;

/// `Δ_T(M₁, M₂)`: out-of-image cells count 1, the rest `|M₁(p) − M₂(T(p))|`,
/// normalized by the number of cells.
pub fn exact_distance_under<R: Raster, M: ImageMap<R::Coord> + ?Sized>(m1: &R, m2: &R, t: &M) -> Result<f64> {
    check_same_side(m1.side(), m2.side())?;
    Ok(mismatch_sum(m1, m2, t) / m1.cells() as f64)
}

fn mismatch_sum<R: Raster, M: ImageMap<R::Coord> + ?Sized>(m1: &R, m2: &R, t: &M) -> f64 {
    let n = m1.side();
    (0..m1.cells())
        .map(|idx| {
            let p = m1.coord_at(idx);
            match t.map(p, n) {
                Some(q) => (m1.value(p) - m2.value(q)).abs(),
                None => 1.0,
            }
        })
        .sum()
}

/// Exhaustive minimum of `Δ_T` over the affine cover at radius `δ′n`.
///
/// Fails with a work-cap error when `|cover| · n²` exceeds `work_cap`.
pub fn exact_distance<R: Raster<Coord = Pixel>>(
    m1: &R,
    m2: &R,
    delta_prime: f64,
    c: f64,
    work_cap: u64,
) -> Result<(AffineMap2D, f64)> {
    check_same_side(m1.side(), m2.side())?;
    let cells = m1.cells() as u64;
    let params = CoverParams::new(m1.side(), delta_prime, c)?.with_cap(work_cap / cells);
    let cover = Cover2D::build(params).map_err(|e| match e {
        Error::Capacity { members, .. } => Error::WorkCap { work: members * cells as u128, cap: work_cap },
        e => e,
    })?;
    exact_distance_over(m1, m2, &cover, work_cap).map(|(_, t, d)| (t, d))
}

/// Exhaustive minimum of `Δ_T` over the members of `cover`, lowest index on ties.
pub fn exact_distance_over<R: Raster<Coord = Pixel>>(
    m1: &R,
    m2: &R,
    cover: &Cover2D,
    work_cap: u64,
) -> Result<(u64, AffineMap2D, f64)> {
    check_same_side(m1.side(), m2.side())?;
    if cover.params().n != m1.side() {
        return Err(Error::domain(format!("cover built for n = {}, images have n = {}", cover.params().n, m1.side())));
    }
    let work = cover.len() as u128 * m1.cells() as u128;
    if work > work_cap as u128 {
        return Err(Error::WorkCap { work, cap: work_cap });
    }
    let cells = m1.cells() as f64;
    let (idx, d) = argmin_par(cover.len(), |i| mismatch_sum(m1, m2, &cover.member(i)) / cells)
        .ok_or_else(|| Error::domain("empty cover"))?;
    Ok((idx, cover.member(idx), d))
}

/// Best integer shift `p ↦ p + (di, dj)` between two binary images.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranslationScan {
    pub di: i64,
    pub dj: i64,
    pub distance: f64,
}

type Bits = Vec<u64>;

fn row_bits(m: &BinaryImage2D, i: usize) -> Bits {
    let n = m.n();
    let mut out = vec![0u64; n.div_ceil(64)];
    for (j, &b) in m.as_slice()[(i - 1) * n..i * n].iter().enumerate() {
        out[j / 64] |= (b as u64) << (j % 64);
    }
    out
}

/// Moves bit `j` to bit `j + s`, dropping bits that leave `0..64·len`.
fn shift_bits(src: &[u64], s: i64) -> Bits {
    let len = src.len() as i64;
    let (ws, bs) = (s.div_euclid(64), s.rem_euclid(64) as u32);
    (0..len)
        .map(|w| {
            let get = |k: i64| if (0..len).contains(&k) { src[k as usize] } else { 0 };
            let lo = get(w - ws);
            let carry = if bs == 0 { 0 } else { get(w - ws - 1) >> (64 - bs) };
            (lo << bs) | carry
        })
        .collect()
}

fn range_mask(words: usize, lo: usize, hi: usize) -> Bits {
    let mut out = vec![0u64; words];
    for j in lo..hi {
        out[j / 64] |= 1 << (j % 64);
    }
    out
}

/// Exhaustive search over all integer translations with `|di|, |dj| < n`.
///
/// A real translation `t` acts on integer pixels as the shift `⌊t⌋`, and
/// shifts of `n` or more move everything out, so this is the exact minimum of
/// `Δ_T` over all translations. Ties go to the lexicographically smallest
/// `(di, dj)`.
pub fn translation_scan(m1: &BinaryImage2D, m2: &BinaryImage2D) -> Result<TranslationScan> {
    check_same_side(m1.n(), m2.n())?;
    let n = m1.n();
    let ni = n as i64;
    let words = n.div_ceil(64);
    let rows1: Vec<Bits> = (1..=n).map(|i| row_bits(m1, i)).collect();
    let rows2: Vec<Bits> = (1..=n).map(|i| row_bits(m2, i)).collect();
    let mut best: Option<(u64, i64, i64)> = None;
    for di in -(ni - 1)..ni {
        for dj in -(ni - 1)..ni {
            let mask = range_mask(words, dj.max(0) as usize, (ni + dj.min(0)) as usize);
            let mut mismatches = 0u64;
            for i in (1 - di.min(0))..=(ni - di.max(0)) {
                let shifted = shift_bits(&rows1[(i - 1) as usize], dj);
                let other = &rows2[(i + di - 1) as usize];
                mismatches += shifted
                    .iter()
                    .zip(other)
                    .zip(&mask)
                    .map(|((a, b), m)| ((a ^ b) & m).count_ones() as u64)
                    .sum::<u64>();
            }
            let overlap = ((ni - di.abs()) * (ni - dj.abs())) as u64;
            let errors = (n * n) as u64 - overlap + mismatches;
            if best.is_none_or(|(e, _, _)| errors < e) {
                best = Some((errors, di, dj));
            }
        }
    }
    let (errors, di, dj) = best.expect("n ≥ 2");
    Ok(TranslationScan { di, dj, distance: errors as f64 / (n * n) as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::Family2D;
    use crate::image::{BinaryImage3D, GrayImage2D};
    use crate::rng;
    use crate::synth;
    use crate::transform::{AffineMap3D, RestrictedMap3D};
    use rand::Rng;

    fn checkerboard(n: usize) -> BinaryImage2D {
        BinaryImage2D::from_fn(n, |p| (p.i + p.j) % 2 == 0).unwrap()
    }

    #[test]
    fn examples() {
        let a = checkerboard(4);
        assert_eq!(exact_distance_under(&a, &a, &AffineMap2D::identity()).unwrap(), 0.0);
        assert_eq!(exact_distance_under(&a, &a, &AffineMap2D::all_out(4)).unwrap(), 1.0);
        assert_eq!(exact_distance_under(&a, &a.inverted(), &AffineMap2D::identity()).unwrap(), 1.0);
        let b = checkerboard(5);
        assert!(matches!(exact_distance_under(&a, &b, &AffineMap2D::identity()), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn gray_and_volume_variants() {
        let a = GrayImage2D::new(2, vec![0.0, 0.5, 1.0, 0.25]).unwrap();
        let b = GrayImage2D::new(2, vec![0.5, 0.5, 0.5, 0.5]).unwrap();
        let d = exact_distance_under(&a, &b, &AffineMap2D::identity()).unwrap();
        assert!((d - (0.5 + 0.0 + 0.5 + 0.25) / 4.0).abs() < 1e-15);

        let v = BinaryImage3D::from_fn(3, |v| v.k == 1).unwrap();
        let up = AffineMap3D::translation([0.0, 0.0, 1.0]);
        // Slice k = 3 leaves the volume; slice 1 lands on slice 2 (all zero).
        let d = exact_distance_under(&v, &v, &up).unwrap();
        assert!((d - (9.0 + 9.0) / 27.0).abs() < 1e-15);
        let r = RestrictedMap3D { zshift: 1.0, ..RestrictedMap3D::identity() };
        // Truncation keeps slice 3 inside (it maps to 3), so only slice 1 mismatches.
        let d = exact_distance_under(&v, &v, &r).unwrap();
        assert!((d - 9.0 / 27.0).abs() < 1e-15);
    }

    #[test]
    fn exact_distance_finds_identity_and_respects_work_cap() {
        let m = synth::disk(8, 4.0, 5.0, 2.5);
        let (t, d) = exact_distance(&m, &m, 1.2, 1.0, DEFAULT_CAP).unwrap();
        assert_eq!(d, 0.0);
        assert_eq!(exact_distance_under(&m, &m, &t).unwrap(), 0.0);
        assert!(matches!(exact_distance(&m, &m, 0.5, 2.0, 1_000_000), Err(Error::WorkCap { .. })));
    }

    const DEFAULT_CAP: u64 = super::super::DEFAULT_WORK_CAP;

    #[test]
    fn shifted_disk_is_recovered() {
        let m1 = synth::disk(8, 4.0, 4.0, 2.0);
        let m2 = synth::shifted_binary(&m1, 2, 0, 0);
        let planted = exact_distance_under(&m1, &m2, &AffineMap2D::translation(2.0, 0.0)).unwrap();
        assert_eq!(planted, 16.0 / 64.0);
        let cover = Cover2D::build_family(CoverParams::new(8, 0.2, 2.0).unwrap(), Family2D::Translation).unwrap();
        let (_, _, d) = exact_distance_over(&m1, &m2, &cover, DEFAULT_CAP).unwrap();
        assert!(d <= planted);
    }

    #[test]
    fn refinement_never_increases_the_minimum() {
        let mut g = rng::stream(8);
        for _ in 0..5 {
            let m1 = synth::random_smooth_binary(&mut g, 16, 6.0);
            let m2 = synth::random_smooth_binary(&mut g, 16, 6.0);
            let cover = Cover2D::build(CoverParams::new(16, 1.4, 1.0).unwrap()).unwrap();
            let fine = cover.refined().unwrap();
            let coarse = exact_distance_over(&m1, &m2, &cover, DEFAULT_CAP).unwrap().2;
            let refined = exact_distance_over(&m1, &m2, &fine, DEFAULT_CAP).unwrap().2;
            assert!(refined <= coarse, "{refined} > {coarse}");
        }
    }

    #[test]
    fn bit_shifts() {
        let src = vec![0x8000_0000_0000_0001u64, 0x1];
        assert_eq!(shift_bits(&src, 1), vec![0x2, 0x3]);
        assert_eq!(shift_bits(&src, -1), vec![0x4000_0000_0000_0000 | (1 << 63), 0]);
        assert_eq!(shift_bits(&src, 64), vec![0, 0x8000_0000_0000_0001]);
        assert_eq!(shift_bits(&src, -64), vec![0x1, 0]);
    }

    #[test]
    fn translation_scan_matches_brute_force() {
        let mut g = rng::stream(12);
        for n in [2, 5, 9, 70] {
            let a = BinaryImage2D::from_fn(n, |_| g.random_bool(0.5)).unwrap();
            let b = BinaryImage2D::from_fn(n, |_| g.random_bool(0.3)).unwrap();
            let scan = translation_scan(&a, &b).unwrap();
            let ni = n as i64;
            let mut best = (f64::INFINITY, 0, 0);
            let step = if n > 20 { 7 } else { 1 };
            for di in (-(ni - 1)..ni).step_by(step) {
                for dj in (-(ni - 1)..ni).step_by(step) {
                    let d = exact_distance_under(&a, &b, &AffineMap2D::translation(di as f64, dj as f64)).unwrap();
                    if d < best.0 {
                        best = (d, di, dj);
                    }
                }
            }
            let at_scan =
                exact_distance_under(&a, &b, &AffineMap2D::translation(scan.di as f64, scan.dj as f64)).unwrap();
            assert_eq!(at_scan, scan.distance);
            assert!(scan.distance <= best.0);
            if step == 1 {
                assert_eq!(scan.distance, best.0);
            }
        }
    }

    #[test]
    fn translation_scan_finds_planted_shift() {
        // A dense texture, so that no other shift comes close.
        let mut g = crate::rng::stream(30);
        let m1 = BinaryImage2D::from_fn(32, |_| g.random_bool(0.5)).unwrap();
        let m2 = synth::shifted_binary(&m1, 3, -4, 0);
        let s = translation_scan(&m1, &m2).unwrap();
        assert_eq!((s.di, s.dj), (3, -4));
        assert!(s.distance < 0.3);
    }
}
