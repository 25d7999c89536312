use std::f64::consts::TAU;

/// A one-dimensional grid of parameter values.
///
/// Closed grids hold both endpoints of `[lo, hi]` and every point
/// `anchor + k·h` strictly between them, so neighbouring points are at most
/// `h` apart and the anchor (0 for shifts, 1 for scales) is always a grid
/// point. Periodic grids hold `lo + k·(period/count)` and wrap.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid1D {
    lo: f64,
    hi: f64,
    kind: Kind,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Kind {
    Single,
    Closed { anchor: f64, h: f64, k_first: i64, k_last: i64 },
    Periodic { count: usize },
}

/// Tolerance (in steps) under which an anchored point is merged into an
/// endpoint, also applied before taking `ceil` of a ratio.
const RATIO_TOL: f64 = 1e-9;

impl Grid1D {
    pub fn single(value: f64) -> Self {
        Self { lo: value, hi: value, kind: Kind::Single }
    }

    pub fn closed(lo: f64, hi: f64, max_step: f64, anchor: f64) -> Self {
        assert!(hi >= lo && max_step > 0.0, "invalid grid [{lo}, {hi}] step {max_step}");
        if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            return Self::single(lo);
        }
        let anchor = anchor.clamp(lo, hi);
        Self { lo, hi, kind: Self::anchored(lo, hi, max_step, anchor) }
    }

    fn anchored(lo: f64, hi: f64, h: f64, anchor: f64) -> Kind {
        // Interior points anchor + k·h with lo < · < hi, ignoring those within
        // a rounding error of an endpoint.
        let k_first = ((lo - anchor) / h + RATIO_TOL).floor() as i64 + 1;
        let k_last = ((hi - anchor) / h - RATIO_TOL).ceil() as i64 - 1;
        Kind::Closed { anchor, h, k_first, k_last }
    }

    /// Angles in `[0, 2π)`.
    pub fn angles(max_step: f64) -> Self {
        assert!(max_step > 0.0);
        let count = (TAU / max_step - RATIO_TOL).ceil().max(1.0) as usize;
        Self { lo: 0.0, hi: TAU, kind: Kind::Periodic { count } }
    }

    pub fn len(&self) -> usize {
        match self.kind {
            Kind::Single => 1,
            Kind::Closed { k_first, k_last, .. } => (k_last - k_first + 1).max(0) as usize + 2,
            Kind::Periodic { count } => count,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_single(&self) -> bool {
        self.len() == 1
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.kind, Kind::Periodic { .. })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Largest distance between neighbouring points (0 for a single point).
    pub fn spacing(&self) -> f64 {
        match self.kind {
            Kind::Single => 0.0,
            Kind::Closed { h, k_first, k_last, .. } if k_last < k_first => (self.hi - self.lo).min(h),
            Kind::Closed { h, .. } => h,
            Kind::Periodic { count } => (self.hi - self.lo) / count as f64,
        }
    }

    #[inline]
    pub fn point(&self, k: usize) -> f64 {
        match self.kind {
            Kind::Single => self.lo,
            Kind::Closed { anchor, h, k_first, .. } => {
                if k == 0 {
                    self.lo
                } else if k + 1 == self.len() {
                    self.hi
                } else {
                    anchor + (k_first + k as i64 - 1) as f64 * h
                }
            }
            Kind::Periodic { count } => self.lo + k as f64 * ((self.hi - self.lo) / count as f64),
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|k| self.point(k))
    }

    /// Index of the grid point closest to `x` (with wrap-around for periodic grids).
    pub fn nearest_index(&self, x: f64) -> usize {
        match self.kind {
            Kind::Single => 0,
            Kind::Periodic { count } => {
                let k = ((x - self.lo) / self.spacing()).round() as i64;
                k.rem_euclid(count as i64) as usize
            }
            Kind::Closed { .. } => {
                let len = self.len();
                // First point ≥ x, by bisection over the sorted points.
                let (mut a, mut b) = (0, len);
                while a < b {
                    let m = (a + b) / 2;
                    if self.point(m) < x {
                        a = m + 1
                    } else {
                        b = m
                    }
                }
                match a {
                    0 => 0,
                    a if a == len => len - 1,
                    a if x - self.point(a - 1) <= self.point(a) - x => a - 1,
                    a => a,
                }
            }
        }
    }

    /// Indices within `radius` steps of `k`, wrapping for periodic grids.
    pub fn neighborhood(&self, k: usize, radius: usize) -> Vec<usize> {
        let c = self.len() as i64;
        let r = radius as i64;
        let mut out: Vec<usize> = (-r..=r)
            .filter_map(|d| {
                let j = k as i64 + d;
                if self.is_periodic() {
                    Some(j.rem_euclid(c) as usize)
                } else {
                    (0..c).contains(&j).then_some(j as usize)
                }
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// The grid with every step halved; contains every point of `self`
    /// bit for bit.
    pub fn refined(&self) -> Self {
        let kind = match self.kind {
            Kind::Single => Kind::Single,
            Kind::Closed { anchor, h, .. } => Self::anchored(self.lo, self.hi, h / 2.0, anchor),
            Kind::Periodic { count } => Kind::Periodic { count: 2 * count },
        };
        Self { kind, ..*self }
    }
}
