//! Hard instance distributions.
//!
//! `D₁` draws two independent images of fair-coin `k × k` blocks. `D₂` draws
//! `M₁` the same way and builds `M₂` by shifting `M₁` down by `s_h` rows and
//! right by `s_v` columns, filling the uncovered strips with fresh blocks.
//! Pairs from `D₂` are close under the planted translation, pairs from `D₁`
//! are far under every translation, and telling them apart takes many
//! queries when `k` is small.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cover::{Cover2D, CoverParams, Family2D};
use crate::error::{Error, Result};
use crate::image::{BinaryImage2D, Pixel};
use crate::matcher::{
    exact_distance_over, exact_distance_under, match_smooth_over, translation_scan, DEFAULT_WORK_CAP,
};
use crate::rng;
use crate::transform::AffineMap2D;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversarialParams {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
}

impl AdversarialParams {
    pub fn new(n: usize, k: usize, seed: u64) -> Result<Self> {
        let p = Self { n, k, seed };
        p.validate()?;
        Ok(p)
    }

    /// Requires `n ≥ 2`, `k ≥ 1`, `k | n` and, unless `k = n`, `k ≤ n/8`.
    pub fn validate(&self) -> Result<()> {
        let Self { n, k, .. } = *self;
        if n < 2 {
            return Err(Error::domain(format!("n = {n} must be at least 2")));
        }
        if k == 0 || n % k != 0 {
            return Err(Error::domain(format!("block size {k} must divide n = {n}")));
        }
        if k != n && 8 * k > n {
            return Err(Error::domain(format!("block size {k} exceeds n/8 = {}", n / 8)));
        }
        Ok(())
    }

    /// Largest shift: `⌊n/8⌋` rounded down to a multiple of `k`.
    pub fn max_shift(&self) -> usize {
        (self.n / 8) / self.k * self.k
    }
}

/// A vertical and horizontal shift, in pixels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shift {
    pub s_h: usize,
    pub s_v: usize,
}

impl Shift {
    /// The translation taking pixel `(i, j)` of `M₁` to `(i + s_h, j + s_v)`.
    pub fn translation(&self) -> AffineMap2D {
        AffineMap2D::translation(self.s_h as f64, self.s_v as f64)
    }
}

fn blocks<G: Rng>(g: &mut G, n: usize, k: usize) -> BinaryImage2D {
    let per_row = n / k;
    let values: Vec<bool> = (0..per_row * per_row).map(|_| g.random_bool(0.5)).collect();
    BinaryImage2D::from_fn(n, |p| values[(p.i - 1) / k * per_row + (p.j - 1) / k]).expect("n ≥ 2")
}

// Independent streams under the instance seed.
const STREAM_M1: u64 = 1;
const STREAM_M2: u64 = 2;
const STREAM_SHIFT: u64 = 3;
const STREAM_FILL: u64 = 4;

fn image(p: &AdversarialParams, stream: u64) -> BinaryImage2D {
    blocks(&mut rng::stream(rng::derive_seed(p.seed, stream)), p.n, p.k)
}

pub fn gen_d1(p: &AdversarialParams) -> Result<(BinaryImage2D, BinaryImage2D)> {
    p.validate()?;
    Ok((image(p, STREAM_M1), image(p, STREAM_M2)))
}

pub fn gen_d2(p: &AdversarialParams) -> Result<(BinaryImage2D, BinaryImage2D, Shift)> {
    gen_d2_with_shift(p, None)
}

/// [`gen_d2`] with the shift optionally forced; a forced shift must be a
/// multiple of `k` no larger than [`AdversarialParams::max_shift`].
pub fn gen_d2_with_shift(p: &AdversarialParams, shift: Option<Shift>) -> Result<(BinaryImage2D, BinaryImage2D, Shift)> {
    p.validate()?;
    let steps = p.max_shift() / p.k;
    let shift = match shift {
        Some(s) => {
            for v in [s.s_h, s.s_v] {
                if v % p.k != 0 || v > p.max_shift() {
                    return Err(Error::domain(format!(
                        "shift {v} is not a multiple of {} in [0, {}]",
                        p.k,
                        p.max_shift()
                    )));
                }
            }
            s
        }
        None => {
            let mut g = rng::stream(rng::derive_seed(p.seed, STREAM_SHIFT));
            let s_h = g.random_range(0..=steps) * p.k;
            let s_v = g.random_range(0..=steps) * p.k;
            Shift { s_h, s_v }
        }
    };
    let m1 = image(p, STREAM_M1);
    let fill = image(p, STREAM_FILL);
    let m2 = BinaryImage2D::from_fn(p.n, |q| {
        if q.i <= shift.s_h || q.j <= shift.s_v {
            fill.get(q) == 1
        } else {
            m1.get(Pixel::new(q.i - shift.s_h, q.j - shift.s_v)) == 1
        }
    })?;
    Ok((m1, m2, shift))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    D1,
    D2,
}

/// One instance of the separation experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationRecord {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub family: Distribution,
    /// Estimated distance returned by the cover search.
    pub estimated_distance: f64,
    /// Exact minimum over the translation cover.
    pub cover_distance: f64,
    /// Exact minimum over all integer translations.
    pub best_translation_distance: f64,
    /// Exact distance under the planted shift (`D₂` only).
    pub planted_distance: Option<f64>,
    pub queries_used: u64,
}

/// For every `(n, seed)`, one `D₁` and one `D₂` instance matched over the
/// translation cover with the sampling matcher, alongside exact references.
pub fn separation_experiment(
    n_values: &[usize],
    k: usize,
    delta_prime: f64,
    epsilon: f64,
    seeds: &[u64],
) -> Result<Vec<SeparationRecord>> {
    let mut out = Vec::with_capacity(2 * n_values.len() * seeds.len());
    for &n in n_values {
        let cover = Cover2D::build_family(CoverParams::new(n, delta_prime, 2.0)?, Family2D::Translation)?;
        for &seed in seeds {
            let p = AdversarialParams::new(n, k, seed)?;
            let (a1, b1) = gen_d1(&p)?;
            let (a2, b2, shift) = gen_d2(&p)?;
            let planted = exact_distance_under(&a2, &b2, &shift.translation())?;
            for (family, m1, m2, planted) in
                [(Distribution::D1, a1, b1, None), (Distribution::D2, a2, b2, Some(planted))]
            {
                let r = match_smooth_over(&m1, &m2, &cover, epsilon, rng::derive_seed(seed, n as u64))?;
                let (_, _, cover_distance) = exact_distance_over(&m1, &m2, &cover, DEFAULT_WORK_CAP)?;
                out.push(SeparationRecord {
                    n,
                    k,
                    seed,
                    family,
                    estimated_distance: r.estimated_distance,
                    cover_distance,
                    best_translation_distance: translation_scan(&m1, &m2)?.distance,
                    planted_distance: planted,
                    queries_used: r.queries_used,
                });
            }
        }
    }
    Ok(out)
}
