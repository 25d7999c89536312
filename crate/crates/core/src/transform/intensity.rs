use serde::{Deserialize, Serialize};

use super::{check_scale, RANGE_TOL};
use crate::error::{Error, Result};

/// Global contrast/brightness change `v ↦ clamp(con·v + bri, 0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntensityMap {
    pub con: f64,
    pub bri: f64,
}

impl IntensityMap {
    pub const fn identity() -> Self {
        Self { con: 1.0, bri: 0.0 }
    }

    pub fn new(con: f64, bri: f64) -> Self {
        Self { con, bri }
    }

    /// Checks `con ∈ [1/c, c]` and `bri ∈ [−c, 1]`.
    pub fn validate(&self, c: f64) -> Result<()> {
        check_scale(self.con, c, "contrast")?;
        if !(self.bri >= -c - RANGE_TOL && self.bri <= 1.0 + RANGE_TOL) {
            return Err(Error::domain(format!("brightness {} outside [-{c}, 1]", self.bri)));
        }
        Ok(())
    }

    #[inline]
    pub fn apply(&self, v: f64) -> f64 {
        (self.con * v + self.bri).clamp(0.0, 1.0)
    }

    /// Points of `[0, 1]` where the clamp switches on or off.
    fn breakpoints(&self) -> impl Iterator<Item = f64> {
        let (con, bri) = (self.con, self.bri);
        [-bri / con, (1.0 - bri) / con].into_iter().filter(|v| v.is_finite() && (0.0..=1.0).contains(v))
    }

    /// `max_{v ∈ [0,1]} |L₁(v) − L₂(v)|`.
    ///
    /// Both maps are piecewise linear, so the difference is extremal at `0`,
    /// `1`, or a clamp breakpoint of either map.
    pub fn linf_distance(&self, other: &IntensityMap) -> f64 {
        [0.0, 1.0]
            .into_iter()
            .chain(self.breakpoints())
            .chain(other.breakpoints())
            .map(|v| (self.apply(v) - other.apply(v)).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn apply_examples() {
        assert_eq!(IntensityMap::identity().apply(0.37), 0.37);
        assert_eq!(IntensityMap::new(2.0, 0.0).apply(0.8), 1.0);
        assert_eq!(IntensityMap::new(0.5, 0.25).apply(0.5), 0.5);
        assert_eq!(IntensityMap::new(1.0, -0.5).apply(0.2), 0.0);
    }

    #[test]
    fn linf_examples() {
        let a = IntensityMap::new(1.3, 0.1);
        assert_eq!(a.linf_distance(&a), 0.0);
        let b = IntensityMap::new(1.0, 0.2);
        let c = IntensityMap::new(1.0, 0.3);
        assert!((b.linf_distance(&c) - 0.1).abs() < 1e-12);
        // At v = 1/2 the identity gives 1/2 and clamp(2v − 1) gives 0; at 0
        // and 1 the maps agree.
        let d = IntensityMap::new(2.0, -1.0);
        assert!((IntensityMap::identity().linf_distance(&d) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        assert!(IntensityMap::new(0.5, -2.0).validate(2.0).is_ok());
        assert!(IntensityMap::new(0.4, 0.0).validate(2.0).is_err());
        assert!(IntensityMap::new(1.0, 1.1).validate(2.0).is_err());
        assert!(IntensityMap::new(1.0, -2.1).validate(2.0).is_err());
    }

    proptest! {
        #[test]
        fn breakpoint_max_matches_dense_scan(c1 in 0.5..2.0f64, b1 in -2.0..1.0f64, c2 in 0.5..2.0f64, b2 in -2.0..1.0f64) {
            let (l1, l2) = (IntensityMap::new(c1, b1), IntensityMap::new(c2, b2));
            let dense = (0..=10_000)
                .map(|k| k as f64 / 10_000.0)
                .map(|v| (l1.apply(v) - l2.apply(v)).abs())
                .fold(0.0, f64::max);
            let exact = l1.linf_distance(&l2);
            prop_assert!(exact >= dense - 1e-12);
            prop_assert!(exact - dense < 1e-3);
        }
    }
}
