//! Query accounting.
//!
//! A query is one oracle call asking for the value at a coordinate. Reads of
//! in-bounds cells count one each. A [`MeteredImage::probe`] at a mapped
//! coordinate that fell outside the image also counts one: the caller asked
//! the oracle and learnt "outside". Side length and coordinate arithmetic are
//! free.

use std::sync::atomic::{AtomicU64, Ordering};

use super::Raster;

/// Wraps an image and counts value lookups.
///
/// The counter is atomic, so one metered image can be shared by parallel
/// workers. Hot loops should take a [`Tally`], which counts locally and folds
/// its total into the shared counter when dropped.
pub struct MeteredImage<'a, R: Raster> {
    inner: &'a R,
    reads: AtomicU64,
}

impl<'a, R: Raster> MeteredImage<'a, R> {
    pub fn new(inner: &'a R) -> Self {
        Self { inner, reads: AtomicU64::new(0) }
    }

    pub fn side(&self) -> usize {
        self.inner.side()
    }

    pub fn cells(&self) -> usize {
        self.inner.cells()
    }

    /// Coordinate of the `idx`-th cell; free.
    pub fn coord_at(&self, idx: usize) -> R::Coord {
        self.inner.coord_at(idx)
    }

    pub fn read(&self, c: R::Coord) -> f64 {
        self.reads.fetch_add(1, Ordering::Relaxed);
        self.inner.value(c)
    }

    pub fn probe(&self, c: Option<R::Coord>) -> Option<f64> {
        self.reads.fetch_add(1, Ordering::Relaxed);
        c.map(|c| self.inner.value(c))
    }

    /// Total queries so far, including those of dropped tallies.
    pub fn reads(&self) -> u64 {
        self.reads.load(Ordering::Relaxed)
    }

    pub fn tally(&self) -> Tally<'_, 'a, R> {
        Tally { image: self, local: 0 }
    }
}

/// A per-worker query counter over a [`MeteredImage`].
pub struct Tally<'m, 'a, R: Raster> {
    image: &'m MeteredImage<'a, R>,
    local: u64,
}

impl<R: Raster> Tally<'_, '_, R> {
    #[inline]
    pub fn read(&mut self, c: R::Coord) -> f64 {
        self.local += 1;
        self.image.inner.value(c)
    }

    #[inline]
    pub fn probe(&mut self, c: Option<R::Coord>) -> Option<f64> {
        self.local += 1;
        c.map(|c| self.image.inner.value(c))
    }

    pub fn pending(&self) -> u64 {
        self.local
    }
}

impl<R: Raster> Drop for Tally<'_, '_, R> {
    fn drop(&mut self) {
        self.image.reads.fetch_add(self.local, Ordering::Relaxed);
    }
}
