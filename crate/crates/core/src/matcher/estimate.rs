use crate::image::{MeteredImage, Raster, Tally};
use crate::rng;

use super::{ImageMap, SampleBudget};

/// Median of a non-empty sample; the upper middle for even lengths.
pub fn median(mut xs: Vec<f64>) -> f64 {
    assert!(!xs.is_empty(), "median of an empty sample");
    xs.sort_unstable_by(f64::total_cmp);
    xs[xs.len() / 2]
}

/// Pixels of `M₁` drawn uniformly with replacement, with their values.
pub(crate) struct Draw<C> {
    pub coords: Vec<C>,
    pub values: Vec<f64>,
}

pub(crate) fn draw<R: Raster>(m1: &MeteredImage<R>, samples: usize, seed: u64) -> Draw<R::Coord> {
    let mut g = rng::stream(seed);
    let mut tally = m1.tally();
    let mut coords = Vec::with_capacity(samples);
    let mut values = Vec::with_capacity(samples);
    for _ in 0..samples {
        let p = m1.coord_at(rng::sample_index(m1.cells(), &mut g));
        values.push(tally.read(p));
        coords.push(p);
    }
    Draw { coords, values }
}

/// Mean per-sample mismatch of `draw` under `t`: 1 when `T(p)` leaves the
/// image, `|M₁(p) − M₂(T(p))|` otherwise.
#[inline]
pub(crate) fn mismatch_mean<R: Raster, M: ImageMap<R::Coord> + ?Sized>(
    m2: &mut Tally<R>,
    t: &M,
    n: usize,
    draw: &Draw<R::Coord>,
) -> f64 {
    let mut sum = 0.0;
    for (&p, &v) in draw.coords.iter().zip(&draw.values) {
        sum += match m2.probe(t.map(p, n)) {
            Some(w) => (v - w).abs(),
            None => 1.0,
        };
    }
    sum / draw.coords.len() as f64
}

/// One run of the sampling estimator of `Δ_T(M₁, M₂)`.
///
/// Reads exactly `per_estimate_samples` values of `M₁` and probes `M₂` as
/// often; deterministic given `seed`.
pub fn estimate_distance_single<R: Raster, M: ImageMap<R::Coord>>(
    m1: &MeteredImage<R>,
    m2: &MeteredImage<R>,
    t: &M,
    budget: &SampleBudget,
    seed: u64,
) -> f64 {
    let d = draw(m1, budget.per_estimate_samples, seed);
    mismatch_mean(&mut m2.tally(), t, m2.side(), &d)
}

/// Median of `budget.reps` single runs; run `r` uses seed `derive_seed(seed, r)`.
pub fn estimate_distance_median<R: Raster, M: ImageMap<R::Coord>>(
    m1: &MeteredImage<R>,
    m2: &MeteredImage<R>,
    t: &M,
    budget: &SampleBudget,
    seed: u64,
) -> f64 {
    median(
        (0..budget.reps)
            .map(|r| estimate_distance_single(m1, m2, t, budget, rng::derive_seed(seed, r as u64)))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::BinaryImage2D;
    use crate::matcher::exact_distance_under;
    use crate::transform::AffineMap2D;

    fn random_pair(n: usize, seed: u64) -> (BinaryImage2D, BinaryImage2D) {
        use rand::Rng;
        let mut g = rng::stream(seed);
        let a = BinaryImage2D::from_fn(n, |_| g.random_bool(0.5)).unwrap();
        let b = BinaryImage2D::from_fn(n, |_| g.random_bool(0.5)).unwrap();
        (a, b)
    }

    #[test]
    fn median_of_odd_and_even() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0]), 4.0);
    }

    #[test]
    fn identical_and_all_out() {
        let (a, _) = random_pair(16, 1);
        let (m1, m2) = (MeteredImage::new(&a), MeteredImage::new(&a));
        let b = SampleBudget::new(0.2, 3).unwrap();
        assert_eq!(estimate_distance_single(&m1, &m2, &AffineMap2D::identity(), &b, 5), 0.0);
        assert_eq!(estimate_distance_median(&m1, &m2, &AffineMap2D::identity(), &b, 5), 0.0);
        assert_eq!(estimate_distance_single(&m1, &m2, &AffineMap2D::all_out(16), &b, 5), 1.0);
    }

    #[test]
    fn query_counts_are_exact() {
        let (a, c) = random_pair(16, 2);
        let (m1, m2) = (MeteredImage::new(&a), MeteredImage::new(&c));
        let b = SampleBudget::new(0.1, 5).unwrap();
        assert_eq!(b.per_estimate_samples, 200);
        estimate_distance_median(&m1, &m2, &AffineMap2D::translation(7.5, -3.0), &b, 9);
        assert_eq!((m1.reads(), m2.reads()), (1000, 1000));
    }

    #[test]
    fn single_rep_median_equals_derived_single_run() {
        let (a, c) = random_pair(32, 3);
        let (m1, m2) = (MeteredImage::new(&a), MeteredImage::new(&c));
        let b = SampleBudget::new(0.15, 1).unwrap();
        let t = AffineMap2D::rotation(0.3).then(&AffineMap2D::translation(4.0, -2.0));
        let med = estimate_distance_median(&m1, &m2, &t, &b, 77);
        let one = estimate_distance_single(&m1, &m2, &t, &b, rng::derive_seed(77, 0));
        assert_eq!(med.to_bits(), one.to_bits());
    }

    #[test]
    fn single_estimate_is_usually_within_epsilon() {
        let (a, c) = random_pair(64, 4);
        let t = AffineMap2D::translation(5.2, 9.9);
        let exact = exact_distance_under(&a, &c, &t).unwrap();
        let (m1, m2) = (MeteredImage::new(&a), MeteredImage::new(&c));
        let b = SampleBudget::new(0.1, 1).unwrap();
        let good = (0..200).filter(|&s| (estimate_distance_single(&m1, &m2, &t, &b, s) - exact).abs() <= 0.1).count();
        assert!(good as f64 >= 200.0 * 2.0 / 3.0, "{good}/200");
    }
}
