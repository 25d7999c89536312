use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cover::better;
use crate::error::{Error, Result};
use crate::image::{check_same_side, MeteredImage, Pixel, Raster};
use crate::rng;
use crate::transform::AffineMap2D;

use super::{ceil_ratio, MatchParams, MatchResult, C1};

/// Switches of the pair-sampling matcher.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralOptions {
    /// Use the literal objective `(n² − Out)·Bad` and discard rule `Hit < ε`.
    pub strict_paper: bool,
    /// Sample factor `C₁`.
    pub c1: f64,
}

impl Default for GeneralOptions {
    fn default() -> Self {
        Self { strict_paper: false, c1: C1 }
    }
}

/// Per-candidate statistics of the pair-sampling matcher.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateScan {
    /// Pixels of `M₁` the candidate maps outside `M₂`; computed geometrically.
    pub out: u64,
    /// Sample pairs `(pᵢ, qⱼ)` with `T(pᵢ) = qⱼ`.
    pub hits: u64,
    /// Mean value mismatch over the hits; 1 when there are none.
    pub bad: f64,
    /// The objective value, normalized by `n²`.
    pub estimate: f64,
    pub discarded: bool,
}

/// `k = ⌈C₁·n·ln(n+1)/ε²⌉` samples per image.
pub fn general_sample_size(n: usize, epsilon: f64, c1: f64) -> usize {
    ceil_ratio(c1 * n as f64 * ((n + 1) as f64).ln() / (epsilon * epsilon)).max(1)
}

struct PairSample {
    /// Image-order coordinates and values of the `M₁` samples.
    p: Vec<(Pixel, f64)>,
    /// Multiplicity and value of each `M₂` pixel among the samples.
    count2: Vec<u32>,
    value2: Vec<f64>,
}

fn sample_pairs<R: Raster<Coord = Pixel>>(
    m1: &MeteredImage<R>,
    m2: &MeteredImage<R>,
    k: usize,
    seed: u64,
) -> PairSample {
    let n = m1.side();
    let mut g1 = rng::stream(rng::derive_seed(seed, 0));
    let mut t1 = m1.tally();
    let p = (0..k)
        .map(|_| {
            let c = m1.coord_at(rng::sample_index(m1.cells(), &mut g1));
            (c, t1.read(c))
        })
        .collect();
    let mut g2 = rng::stream(rng::derive_seed(seed, 1));
    let mut t2 = m2.tally();
    let mut count2 = vec![0u32; n * n];
    let mut value2 = vec![0.0; n * n];
    for _ in 0..k {
        let idx = rng::sample_index(m2.cells(), &mut g2);
        value2[idx] = t2.read(m2.coord_at(idx));
        count2[idx] += 1;
    }
    PairSample { p, count2, value2 }
}

fn scan_one(t: &AffineMap2D, s: &PairSample, n: usize, k: usize, epsilon: f64, opts: &GeneralOptions) -> CandidateScan {
    let out = Pixel::all(n).filter(|&p| t.apply_image(p, n).is_none()).count() as u64;
    let (mut hits, mut bad_sum) = (0u64, 0.0);
    for &(p, v) in &s.p {
        if let Some(q) = t.apply_image(p, n) {
            let idx = q.offset(n);
            let c = s.count2[idx] as u64;
            if c > 0 {
                hits += c;
                bad_sum += c as f64 * (v - s.value2[idx]).abs();
            }
        }
    }
    let nn = (n * n) as f64;
    let threshold = if opts.strict_paper { epsilon } else { epsilon * (k * k) as f64 / nn };
    let bad = if hits > 0 { bad_sum / hits as f64 } else { 1.0 };
    let inside = nn - out as f64;
    let estimate = if opts.strict_paper { inside * bad / nn } else { (out as f64 + inside * bad) / nn };
    CandidateScan { out, hits, bad, estimate, discarded: (hits as f64) < threshold }
}

/// Per-candidate `Out`, `Hit`, `Bad` and objective over one shared pair sample.
pub fn general_scan<R: Raster<Coord = Pixel>>(
    m1: &MeteredImage<R>,
    m2: &MeteredImage<R>,
    epsilon: f64,
    candidates: &[AffineMap2D],
    seed: u64,
    opts: &GeneralOptions,
) -> Result<Vec<CandidateScan>> {
    check_same_side(m1.side(), m2.side())?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain(format!("epsilon {epsilon} outside (0, 1)")));
    }
    let n = m1.side();
    let k = general_sample_size(n, epsilon, opts.c1);
    let s = sample_pairs(m1, m2, k, seed);
    Ok(candidates.par_iter().map(|t| scan_one(t, &s, n, k, epsilon, opts)).collect())
}

/// The pair-sampling matcher for images of arbitrary perimeter.
///
/// Samples `k` pixels of each image, then for every candidate estimates
/// `Δ_T` as `(Out + (n² − Out)·Bad)/n²`, skipping candidates whose hit count
/// falls below `ε·k²/n²`. Returns the all-out map with distance 1 when every
/// candidate is skipped. Uses `2k` queries.
pub fn match_general<R: Raster<Coord = Pixel>>(
    m1: &R,
    m2: &R,
    epsilon: f64,
    candidates: &[AffineMap2D],
    seed: u64,
    opts: &GeneralOptions,
) -> Result<MatchResult> {
    if candidates.is_empty() {
        return Err(Error::domain("no candidate transformations"));
    }
    let (a, b) = (MeteredImage::new(m1), MeteredImage::new(m2));
    let scans = general_scan(&a, &b, epsilon, candidates, seed, opts)?;
    let best =
        scans.iter().enumerate().filter(|(_, s)| !s.discarded).map(|(i, s)| (i as u64, s.estimate)).reduce(better);
    let n = m1.side();
    let (transform, estimated_distance, member_index) = match best {
        Some((i, d)) => (candidates[i as usize], d.clamp(0.0, 1.0), Some(i)),
        None => (AffineMap2D::all_out(n), 1.0, None),
    };
    Ok(MatchResult {
        transform,
        estimated_distance,
        queries_used: a.reads() + b.reads(),
        member_index,
        params: MatchParams {
            delta_prime: None,
            epsilon,
            c: None,
            seed,
            reps: 1,
            samples_per_estimate: general_sample_size(n, epsilon, opts.c1),
            candidates: candidates.len() as u64,
            strict_paper: opts.strict_paper,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::BinaryImage2D;
    use crate::matcher::exact_distance_under;
    use crate::synth;
    use rand::Rng;

    #[test]
    fn identity_on_equal_images() {
        let m = synth::disk(16, 8.0, 7.0, 4.0);
        let r = match_general(&m, &m, 0.3, &[AffineMap2D::identity()], 1, &GeneralOptions::default()).unwrap();
        assert_eq!(r.transform, AffineMap2D::identity());
        assert_eq!(r.estimated_distance, 0.0);
        let r = match_general(
            &m,
            &m,
            0.3,
            &[AffineMap2D::all_out(16), AffineMap2D::identity()],
            1,
            &GeneralOptions::default(),
        )
        .unwrap();
        assert_eq!(r.member_index, Some(1));
    }

    #[test]
    fn all_discarded_falls_back_to_all_out() {
        let m = synth::disk(16, 8.0, 7.0, 4.0);
        let r = match_general(&m, &m, 0.3, &[AffineMap2D::all_out(16)], 1, &GeneralOptions::default()).unwrap();
        assert_eq!((r.member_index, r.estimated_distance), (None, 1.0));
    }

    #[test]
    fn query_count_is_two_k() {
        let m = synth::disk(32, 8.0, 7.0, 4.0);
        let r = match_general(&m, &m, 0.2, &[AffineMap2D::identity()], 1, &GeneralOptions::default()).unwrap();
        assert_eq!(r.queries_used, 2 * general_sample_size(32, 0.2, C1) as u64);
    }

    #[test]
    fn out_count_and_strict_mode() {
        let m = synth::disk(16, 8.0, 8.0, 5.0);
        let (a, b) = (MeteredImage::new(&m), MeteredImage::new(&m));
        let t = AffineMap2D::translation(4.0, 0.0);
        let opts = GeneralOptions::default();
        let s = general_scan(&a, &b, 0.2, &[t], 3, &opts).unwrap()[0];
        assert_eq!(s.out, 4 * 16);
        let strict = general_scan(&a, &b, 0.2, &[t], 3, &GeneralOptions { strict_paper: true, ..opts }).unwrap()[0];
        assert!(strict.estimate < s.estimate);
        assert!((s.estimate - strict.estimate - 0.25).abs() < 1e-12);
    }

    #[test]
    fn planted_candidate_estimate_tracks_exact_distance() {
        let mut g = rng::stream(21);
        let n = 32;
        let mut good = 0;
        let trials = 30;
        for seed in 0..trials {
            let m1 = BinaryImage2D::from_fn(n, |_| g.random_bool(0.5)).unwrap();
            let m2 = synth::shifted_binary(&m1, 2, 3, 0);
            let planted = AffineMap2D::translation(2.0, 3.0);
            let exact = exact_distance_under(&m1, &m2, &planted).unwrap();
            let (a, b) = (MeteredImage::new(&m1), MeteredImage::new(&m2));
            let s = general_scan(&a, &b, 0.15, &[planted], seed, &GeneralOptions::default()).unwrap()[0];
            if (s.estimate - exact).abs() <= 0.15 {
                good += 1;
            }
        }
        assert!(3 * good >= 2 * trials, "{good}/{trials}");
    }
}
