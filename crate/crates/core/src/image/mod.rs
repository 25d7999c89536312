//! Square pixel and voxel grids.
//!
//! All three containers are immutable after construction and store their
//! values row-major with 0-based offsets; every public accessor takes 1-based
//! coordinates.

mod metered;
mod perimeter;

pub use metered::{MeteredImage, Tally};
pub use perimeter::{
    boundary_pixels_2d, boundary_voxels_3d, gradient, is_boundary_2d, is_boundary_3d, is_smooth, perimeter_binary_2d,
    perimeter_binary_3d, perimeter_gray, Perimeter,
};

use crate::error::{Error, Result};

/// A pixel `(i, j)` with `i` the row and `j` the column, both in `{1, …, n}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pixel {
    pub i: usize,
    pub j: usize,
}

impl Pixel {
    pub const fn new(i: usize, j: usize) -> Self {
        Self { i, j }
    }

    #[inline]
    pub fn in_bounds(self, n: usize) -> bool {
        (1..=n).contains(&self.i) && (1..=n).contains(&self.j)
    }

    #[inline]
    pub(crate) fn offset(self, n: usize) -> usize {
        (self.i - 1) * n + (self.j - 1)
    }

    /// Iterates all pixels of an `n × n` image in row-major order.
    pub fn all(n: usize) -> impl Iterator<Item = Pixel> {
        (1..=n).flat_map(move |i| (1..=n).map(move |j| Pixel::new(i, j)))
    }
}

/// A voxel `(i, j, k)`, all coordinates in `{1, …, n}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Voxel {
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

impl Voxel {
    pub const fn new(i: usize, j: usize, k: usize) -> Self {
        Self { i, j, k }
    }

    #[inline]
    pub fn in_bounds(self, n: usize) -> bool {
        (1..=n).contains(&self.i) && (1..=n).contains(&self.j) && (1..=n).contains(&self.k)
    }

    /// Offset of the voxel; `k` is the slowest axis so each `k`-slice is contiguous.
    #[inline]
    pub(crate) fn offset(self, n: usize) -> usize {
        ((self.k - 1) * n + (self.i - 1)) * n + (self.j - 1)
    }

    pub fn all(n: usize) -> impl Iterator<Item = Voxel> {
        (1..=n).flat_map(move |k| (1..=n).flat_map(move |i| (1..=n).map(move |j| Voxel::new(i, j, k))))
    }
}

/// Read access to a square grid of values in `[0, 1]`.
///
/// Implemented by every image type so that the estimators and the metering
/// facade can be written once.
pub trait Raster: Sync {
    type Coord: Copy + Send + Sync;

    /// Side length `n`.
    fn side(&self) -> usize;

    /// Number of cells, `n²` or `n³`.
    fn cells(&self) -> usize;

    /// Value at an in-bounds coordinate, as a real in `[0, 1]`.
    fn value(&self, c: Self::Coord) -> f64;

    /// The `idx`-th cell in storage order, used for uniform sampling.
    fn coord_at(&self, idx: usize) -> Self::Coord;
}

/// An `n × n` image with values in `{0, 1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryImage2D {
    n: usize,
    bits: Vec<u8>,
}

impl BinaryImage2D {
    /// Builds an image from row-major values, which must all be 0 or 1.
    pub fn new(n: usize, bits: Vec<u8>) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("binary image side must be at least 2, got {n}")));
        }
        if bits.len() != n * n {
            return Err(Error::domain(format!("expected {} values for a {n}x{n} image, got {}", n * n, bits.len())));
        }
        if let Some(bad) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::domain(format!("binary image value {bad} is not 0 or 1")));
        }
        Ok(Self { n, bits })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(n, vec![0; n * n])
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(Pixel) -> bool) -> Result<Self> {
        let bits = Pixel::all(n).map(|p| u8::from(f(p))).collect();
        Self::new(n, bits)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Value at `p`. Panics if `p` is out of bounds.
    #[inline]
    pub fn get(&self, p: Pixel) -> u8 {
        assert!(p.in_bounds(self.n), "pixel {p:?} outside {0}x{0} image", self.n);
        self.bits[p.offset(self.n)]
    }

    pub fn try_get(&self, p: Pixel) -> Option<u8> {
        p.in_bounds(self.n).then(|| self.bits[p.offset(self.n)])
    }

    /// Row-major values.
    pub fn as_slice(&self) -> &[u8] {
        &self.bits
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    /// The same values viewed as a grayscale image.
    pub fn to_gray(&self) -> GrayImage2D {
        GrayImage2D { n: self.n, values: self.bits.iter().map(|&b| f64::from(b)).collect() }
    }

    /// Inverts every value.
    pub fn inverted(&self) -> Self {
        Self { n: self.n, bits: self.bits.iter().map(|&b| 1 - b).collect() }
    }
}

impl Raster for BinaryImage2D {
    type Coord = Pixel;

    fn side(&self) -> usize {
        self.n
    }

    fn cells(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    fn value(&self, p: Pixel) -> f64 {
        f64::from(self.bits[p.offset(self.n)])
    }

    #[inline]
    fn coord_at(&self, idx: usize) -> Pixel {
        Pixel::new(idx / self.n + 1, idx % self.n + 1)
    }
}

/// An `n × n` image with real values in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage2D {
    n: usize,
    values: Vec<f64>,
}

impl GrayImage2D {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("grayscale image side must be positive"));
        }
        if values.len() != n * n {
            return Err(Error::domain(format!("expected {} values for a {n}x{n} image, got {}", n * n, values.len())));
        }
        if let Some(bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::domain(format!("grayscale value {bad} outside [0, 1]")));
        }
        Ok(Self { n, values })
    }

    pub fn from_fn(n: usize, f: impl FnMut(Pixel) -> f64) -> Result<Self> {
        let values = Pixel::all(n).map(f).collect();
        Self::new(n, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, p: Pixel) -> f64 {
        assert!(p.in_bounds(self.n), "pixel {p:?} outside {0}x{0} image", self.n);
        self.values[p.offset(self.n)]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Applies `f` to every value; the results must stay in `[0, 1]`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.n, self.values.iter().map(|&v| f(v)).collect())
    }
}

impl Raster for GrayImage2D {
    type Coord = Pixel;

    fn side(&self) -> usize {
        self.n
    }

    fn cells(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    fn value(&self, p: Pixel) -> f64 {
        self.values[p.offset(self.n)]
    }

    #[inline]
    fn coord_at(&self, idx: usize) -> Pixel {
        Pixel::new(idx / self.n + 1, idx % self.n + 1)
    }
}

/// An `n × n × n` volume with values in `{0, 1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryImage3D {
    n: usize,
    bits: Vec<u8>,
}

impl BinaryImage3D {
    /// Builds a volume from values stored slice by slice (`k` slowest, then `i`, then `j`).
    pub fn new(n: usize, bits: Vec<u8>) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("volume side must be positive"));
        }
        if bits.len() != n * n * n {
            return Err(Error::domain(format!("expected {} values for a {n}^3 volume, got {}", n * n * n, bits.len())));
        }
        if let Some(bad) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::domain(format!("volume value {bad} is not 0 or 1")));
        }
        Ok(Self { n, bits })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(n, vec![0; n * n * n])
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(Voxel) -> bool) -> Result<Self> {
        let bits = Voxel::all(n).map(|v| u8::from(f(v))).collect();
        Self::new(n, bits)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, v: Voxel) -> u8 {
        assert!(v.in_bounds(self.n), "voxel {v:?} outside {0}^3 volume", self.n);
        self.bits[v.offset(self.n)]
    }

    pub fn try_get(&self, v: Voxel) -> Option<u8> {
        v.in_bounds(self.n).then(|| self.bits[v.offset(self.n)])
    }

    /// Values in storage order (`k` slowest).
    pub fn as_slice(&self) -> &[u8] {
        &self.bits
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }
}

impl Raster for BinaryImage3D {
    type Coord = Voxel;

    fn side(&self) -> usize {
        self.n
    }

    fn cells(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    fn value(&self, v: Voxel) -> f64 {
        f64::from(self.bits[v.offset(self.n)])
    }

    #[inline]
    fn coord_at(&self, idx: usize) -> Voxel {
        let n = self.n;
        Voxel::new((idx / n) % n + 1, idx % n + 1, idx / (n * n) + 1)
    }
}

pub(crate) fn check_same_side(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { left: a, right: b })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes_and_values() {
        assert!(BinaryImage2D::new(1, vec![0]).is_err());
        assert!(BinaryImage2D::new(2, vec![0, 1, 0]).is_err());
        assert!(BinaryImage2D::new(2, vec![0, 1, 2, 0]).is_err());
        assert!(GrayImage2D::new(2, vec![0.0, 0.5, 1.0, 1.5]).is_err());
        assert!(GrayImage2D::new(2, vec![0.0, -0.1, 1.0, 0.5]).is_err());
        assert!(BinaryImage3D::new(2, vec![0; 7]).is_err());
    }

    #[test]
    fn coord_at_matches_storage_order() {
        let img = BinaryImage2D::from_fn(5, |p| p.i == 2 && p.j == 4).unwrap();
        let idx = img.as_slice().iter().position(|&b| b == 1).unwrap();
        assert_eq!(img.coord_at(idx), Pixel::new(2, 4));

        let vol = BinaryImage3D::from_fn(4, |v| v == Voxel::new(3, 1, 2)).unwrap();
        let idx = vol.as_slice().iter().position(|&b| b == 1).unwrap();
        assert_eq!(vol.coord_at(idx), Voxel::new(3, 1, 2));
    }
}
