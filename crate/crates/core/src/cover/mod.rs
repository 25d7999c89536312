//! Finite δ′n-covers of transformation families.
//!
//! A cover is the Cartesian product of one-dimensional parameter grids over
//! the rotation–scale–rotation–translation decomposition. Members are never
//! materialized: member `idx` is decoded from its mixed-radix digits, so
//! workers can process disjoint index ranges independently.
//!
//! Step constants. Write `δ = δ′/(c+3)` and note that every point of the
//! domain `[1, n+1]²` has `‖p‖ ≤ √2(n+1)`. Snapping a parameter to its nearest
//! grid point moves it by at most half a step, so per primitive:
//!
//! - rotation step `δ/√2`: displacement `≤ c · δ/(2√2) · √2(n+1) = cδ(n+1)/2`
//!   for each of the two rotations;
//! - scale step `δ/√2`: the diagonal error has operator norm `≤ δ/(2√2)`,
//!   displacement `≤ δ(n+1)/2`;
//! - translation step `√2δn`: per-axis error `≤ δn/√2`, displacement `≤ δn`.
//!
//! The sum is `δ(n+1)(c + 1/2) + δn ≤ (c+3)δn = δ′n` for `n ≥ 1`.
//! In 3D the same argument with `‖p‖ ≤ √3(n+1)`, three Euler angles per
//! rotation and three axes gives the steps `δ/(3√3)`, `δ/√3` and `δn/√3`.

mod cover2d;
mod cover3d;
mod grid;

pub use cover2d::{random_in_family_2d, Cover2D, Family2D};
pub use cover3d::{random_in_family_3d, random_restricted_3d, Cover3DFull, Cover3DRestricted, Family3D};
pub use grid::Grid1D;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of cover members.
pub const DEFAULT_CAPACITY: u64 = 100_000_000;

/// Resolution and limits of a cover.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverParams {
    pub n: usize,
    pub delta_prime: f64,
    pub c: f64,
    pub cap: u64,
}

impl CoverParams {
    pub fn new(n: usize, delta_prime: f64, c: f64) -> Result<Self> {
        let p = Self { n, delta_prime, c, cap: DEFAULT_CAPACITY };
        p.validate()?;
        Ok(p)
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.cap = cap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::domain("n must be positive"));
        }
        if !(self.delta_prime > 0.0 && self.delta_prime < std::f64::consts::SQRT_2) {
            return Err(Error::domain(format!("delta_prime {} outside (0, √2)", self.delta_prime)));
        }
        if !(self.c >= 1.0 && self.c.is_finite()) {
            return Err(Error::domain(format!("scaling bound c = {} must be ≥ 1", self.c)));
        }
        Ok(())
    }

    /// Per-primitive resolution `δ = δ′/(c+3)`.
    pub fn delta(&self) -> f64 {
        self.delta_prime / (self.c + 3.0)
    }

    /// The cover radius `δ′n` in pixels.
    pub fn radius(&self) -> f64 {
        self.delta_prime * self.n as f64
    }
}

/// Named axes of a product grid with mixed-radix member indexing.
///
/// The last axis varies fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductGrid {
    axes: Vec<(&'static str, Grid1D)>,
}

impl ProductGrid {
    pub(crate) fn new(axes: Vec<(&'static str, Grid1D)>) -> Self {
        Self { axes }
    }

    pub fn axes(&self) -> &[(&'static str, Grid1D)] {
        &self.axes
    }

    pub fn grid(&self, axis: usize) -> &Grid1D {
        &self.axes[axis].1
    }

    pub fn cardinalities(&self) -> Vec<(&'static str, usize)> {
        self.axes.iter().map(|(name, g)| (*name, g.len())).collect()
    }

    /// Member count without overflow.
    pub fn size(&self) -> u128 {
        self.axes.iter().map(|(_, g)| g.len() as u128).product()
    }

    pub(crate) fn check_capacity(&self, cap: u64) -> Result<u64> {
        let members = self.size();
        if members > cap as u128 {
            return Err(Error::Capacity { members, cap });
        }
        Ok(members as u64)
    }

    /// Like `check_capacity` but with no cap beyond what `u128` holds.
    pub(crate) fn check_capacity_wide(&self, cap: Option<u64>) -> Result<u128> {
        match cap {
            Some(cap) => self.check_capacity(cap).map(u128::from),
            None => Ok(self.size()),
        }
    }

    /// Per-axis indices of member `idx`.
    pub fn digits(&self, mut idx: u128) -> Vec<usize> {
        let mut out = vec![0; self.axes.len()];
        for (d, (_, g)) in out.iter_mut().zip(&self.axes).rev() {
            let len = g.len() as u128;
            *d = (idx % len) as usize;
            idx /= len;
        }
        out
    }

    pub fn rank(&self, digits: &[usize]) -> u128 {
        digits.iter().zip(&self.axes).fold(0u128, |acc, (&d, (_, g))| acc * g.len() as u128 + d as u128)
    }

    /// Parameter values of member `idx`.
    pub fn values(&self, idx: u128) -> Vec<f64> {
        self.digits(idx).iter().zip(&self.axes).map(|(&d, (_, g))| g.point(d)).collect()
    }

    pub(crate) fn refined(&self) -> Self {
        Self { axes: self.axes.iter().map(|(name, g)| (*name, g.refined())).collect() }
    }

    /// Indices of all members whose digits lie within `radius` of the
    /// nearest grid point of each coordinate of `x`, in increasing order.
    pub(crate) fn neighborhood(&self, x: &[f64], radius: usize) -> Vec<u128> {
        let per_axis: Vec<Vec<usize>> =
            self.axes.iter().zip(x).map(|((_, g), &v)| g.neighborhood(g.nearest_index(v), radius)).collect();
        let mut out = vec![0u128];
        for (choices, (_, g)) in per_axis.iter().zip(&self.axes) {
            let len = g.len() as u128;
            out = out.iter().flat_map(|&base| choices.iter().map(move |&d| base * len + d as u128)).collect();
        }
        out.sort_unstable();
        out
    }
}

/// Outcome of a randomized cover-property check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub samples: usize,
    pub failures: usize,
    pub max_distance: f64,
    pub radius: f64,
}

impl Certificate {
    pub fn pass_rate(&self) -> f64 {
        if self.samples == 0 {
            return 1.0;
        }
        (self.samples - self.failures) as f64 / self.samples as f64
    }

    pub(crate) fn from_distances(distances: &[f64], radius: f64) -> Self {
        Self {
            samples: distances.len(),
            failures: distances.iter().filter(|&&d| d > radius).count(),
            max_distance: distances.iter().copied().fold(0.0, f64::max),
            radius,
        }
    }
}

/// Lowest-index argmin over `0..len` of `dist`, evaluated in parallel.
pub(crate) fn argmin_par(len: u64, dist: impl Fn(u64) -> f64 + Sync) -> Option<(u64, f64)> {
    use rayon::prelude::*;
    const CHUNK: u64 = 1 << 14;
    let chunks = len.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .filter_map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(len);
            argmin_seq(lo..hi, &dist)
        })
        .reduce_with(better)
}

pub(crate) fn argmin_seq<I: Copy + Ord>(ids: impl IntoIterator<Item = I>, dist: impl Fn(I) -> f64) -> Option<(I, f64)> {
    ids.into_iter().map(|i| (i, dist(i))).reduce(better)
}

#[inline]
pub(crate) fn better<I: Ord>(a: (I, f64), b: (I, f64)) -> (I, f64) {
    if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) {
        b
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_validation() {
        assert!(CoverParams::new(32, 0.5, 2.0).is_ok());
        assert!(CoverParams::new(32, 0.0, 2.0).is_err());
        assert!(CoverParams::new(32, 1.5, 2.0).is_err());
        assert!(CoverParams::new(32, 0.5, 0.5).is_err());
        assert!((CoverParams::new(32, 0.5, 2.0).unwrap().delta() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn mixed_radix_round_trip() {
        let g = ProductGrid::new(vec![
            ("a", Grid1D::closed(0.0, 1.0, 0.5, 0.0)),
            ("b", Grid1D::angles(1.0)),
            ("c", Grid1D::single(3.0)),
        ]);
        assert_eq!(g.size(), 3 * 7);
        for idx in 0..21 {
            assert_eq!(g.rank(&g.digits(idx)), idx);
        }
        assert_eq!(g.values(8), vec![0.5, g.grid(1).point(1), 3.0]);
    }

    #[test]
    fn argmin_prefers_lowest_index_on_ties() {
        let d = |i: u64| if i % 5 == 3 { 0.0 } else { 1.0 };
        assert_eq!(argmin_par(100_000, d), Some((3, 0.0)));
        assert_eq!(argmin_seq([9u64, 4, 8], |i| (i % 4) as f64), Some((4, 0.0)));
    }

    #[test]
    fn capacity_error_is_explicit() {
        let g = ProductGrid::new(vec![("a", Grid1D::closed(0.0, 1.0, 1e-3, 0.0)); 4]);
        assert!(matches!(g.check_capacity(1_000_000), Err(Error::Capacity { .. })));
    }
}
