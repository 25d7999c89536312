//! Exact distances, sampling estimators and cover-search matchers.
//!
//! Every estimator reads pixel values only through a [`MeteredImage`], so the
//! reported query counts are measured rather than predicted.
//!
//! [`MeteredImage`]: crate::image::MeteredImage

mod estimate;
mod exact;
mod general;
mod smooth;

pub use estimate::{estimate_distance_median, estimate_distance_single, median};
pub use exact::{exact_distance, exact_distance_over, exact_distance_under, translation_scan, TranslationScan};
pub use general::{general_scan, match_general, CandidateScan, GeneralOptions};
pub use smooth::{match_smooth, match_smooth_3d, match_smooth_3d_over, match_smooth_family, match_smooth_over};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{Pixel, Voxel};
use crate::transform::{AffineMap2D, AffineMap3D, RestrictedMap3D};

/// Sample factor of the general matcher: `k = ⌈C₁·n·ln(n+1)/ε²⌉`.
pub const C1: f64 = 4.0;
/// Samples per estimate: `⌈C₂/ε²⌉`.
pub const C2: f64 = 2.0;
/// Median repetitions: `m = max(1, ⌈C_m·ln ℓ⌉)` for a cover of `ℓ` members.
pub const CM: f64 = 3.0;
/// Default cap on pixel evaluations of the exact oracle.
pub const DEFAULT_WORK_CAP: u64 = 10_000_000_000;

/// `⌈x⌉` for a ratio that may sit one rounding error above an integer.
pub(crate) fn ceil_ratio(x: f64) -> usize {
    (x - 1e-9).ceil().max(0.0) as usize
}

/// The pixel-level action of a transformation.
pub trait ImageMap<C>: Sync {
    fn map(&self, c: C, n: usize) -> Option<C>;
}

impl ImageMap<Pixel> for AffineMap2D {
    #[inline]
    fn map(&self, p: Pixel, n: usize) -> Option<Pixel> {
        self.apply_image(p, n)
    }
}

impl ImageMap<Voxel> for AffineMap3D {
    #[inline]
    fn map(&self, v: Voxel, n: usize) -> Option<Voxel> {
        self.apply_image(v, n)
    }
}

impl ImageMap<Voxel> for RestrictedMap3D {
    #[inline]
    fn map(&self, v: Voxel, n: usize) -> Option<Voxel> {
        self.apply_image(v, n)
    }
}

/// Sample sizes of the sampling estimator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleBudget {
    pub epsilon: f64,
    /// Median repetitions `m`, always odd.
    pub reps: usize,
    pub per_estimate_samples: usize,
}

impl SampleBudget {
    /// `reps` is rounded up to the next odd number.
    pub fn new(epsilon: f64, reps: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::domain(format!("epsilon {epsilon} outside (0, 1)")));
        }
        if reps == 0 {
            return Err(Error::domain("at least one repetition is required"));
        }
        let reps = if reps.is_multiple_of(2) { reps + 1 } else { reps };
        Ok(Self { epsilon, reps, per_estimate_samples: ceil_ratio(C2 / (epsilon * epsilon)).max(1) })
    }

    /// Budget for searching a cover of `members` transformations.
    pub fn for_cover(epsilon: f64, members: u128) -> Result<Self> {
        Self::new(epsilon, median_reps(members))
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.per_estimate_samples = samples.max(1);
        self
    }
}

/// `max(1, ⌈C_m·ln ℓ⌉)`, before rounding up to odd.
pub fn median_reps(members: u128) -> usize {
    ceil_ratio(CM * (members.max(1) as f64).ln()).max(1)
}

/// Parameters a match result was produced under.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchParams {
    pub delta_prime: Option<f64>,
    pub epsilon: f64,
    /// Scaling bound of the cover, `None` for an explicit candidate list.
    pub c: Option<f64>,
    pub seed: u64,
    pub reps: usize,
    pub samples_per_estimate: usize,
    pub candidates: u64,
    pub strict_paper: bool,
}

/// The chosen transformation with its estimated distance and query count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchResult<T = AffineMap2D> {
    pub transform: T,
    pub estimated_distance: f64,
    pub queries_used: u64,
    /// Index of the chosen candidate, `None` for the all-out fallback.
    pub member_index: Option<u64>,
    pub params: MatchParams,
}
