//! Boundary, perimeter and gradient computations.
//!
//! Adjacency is the 8-neighbourhood in 2D and the 26-neighbourhood in 3D. A
//! perimeter is a set: a boundary cell on the outermost layer counts once.

use super::{BinaryImage2D, BinaryImage3D, GrayImage2D, Pixel, Voxel};
use crate::error::{Error, Result};

fn neighbors_2d(p: Pixel, n: usize) -> impl Iterator<Item = Pixel> {
    let (i, j) = (p.i as isize, p.j as isize);
    (-1isize..=1)
        .flat_map(move |di| (-1isize..=1).map(move |dj| (di, dj)))
        .filter(|&(di, dj)| di != 0 || dj != 0)
        .filter_map(move |(di, dj)| {
            let (a, b) = (i + di, j + dj);
            (a >= 1 && b >= 1 && a <= n as isize && b <= n as isize).then(|| Pixel::new(a as usize, b as usize))
        })
}

fn on_outer_ring(p: Pixel, n: usize) -> bool {
    p.i == 1 || p.j == 1 || p.i == n || p.j == n
}

/// Whether `p` has an adjacent pixel of a different value.
pub fn is_boundary_2d(m: &BinaryImage2D, p: Pixel) -> bool {
    let v = m.get(p);
    neighbors_2d(p, m.n()).any(|q| m.get(q) != v)
}

/// Number of pixels with an 8-neighbor of the other value.
pub fn boundary_pixels_2d(m: &BinaryImage2D) -> usize {
    Pixel::all(m.n()).filter(|&p| is_boundary_2d(m, p)).count()
}

/// Number of voxels with a 26-neighbor of the other value.
pub fn boundary_voxels_3d(m: &BinaryImage3D) -> usize {
    Voxel::all(m.n()).filter(|&v| is_boundary_3d(m, v)).count()
}

/// Size of the set of boundary pixels together with the `4n − 4` outermost pixels.
pub fn perimeter_binary_2d(m: &BinaryImage2D) -> usize {
    let n = m.n();
    Pixel::all(n).filter(|&p| on_outer_ring(p, n) || is_boundary_2d(m, p)).count()
}

/// Size of the set of boundary voxels together with the outer shell of
/// `6n² − 12n + 8` voxels.
pub fn perimeter_binary_3d(m: &BinaryImage3D) -> usize {
    let n = m.n();
    Voxel::all(n).filter(|&v| on_outer_shell(v, n) || is_boundary_3d(m, v)).count()
}

fn on_outer_shell(v: Voxel, n: usize) -> bool {
    [v.i, v.j, v.k].iter().any(|&c| c == 1 || c == n)
}

pub fn is_boundary_3d(m: &BinaryImage3D, v: Voxel) -> bool {
    let n = m.n() as isize;
    let val = m.get(v);
    for di in -1isize..=1 {
        for dj in -1isize..=1 {
            for dk in -1isize..=1 {
                if di == 0 && dj == 0 && dk == 0 {
                    continue;
                }
                let (a, b, c) = (v.i as isize + di, v.j as isize + dj, v.k as isize + dk);
                if a < 1 || b < 1 || c < 1 || a > n || b > n || c > n {
                    continue;
                }
                if m.get(Voxel::new(a as usize, b as usize, c as usize)) != val {
                    return true;
                }
            }
        }
    }
    false
}

/// Maximal absolute difference between `M(p)` and the values of its adjacent pixels.
pub fn gradient(m: &GrayImage2D, p: Pixel) -> Result<f64> {
    if !p.in_bounds(m.n()) {
        return Err(Error::domain(format!("pixel {p:?} outside {0}x{0} image", m.n())));
    }
    Ok(gradient_unchecked(m, p))
}

fn gradient_unchecked(m: &GrayImage2D, p: Pixel) -> f64 {
    let v = m.get(p);
    neighbors_2d(p, m.n()).map(|q| (v - m.get(q)).abs()).fold(0.0, f64::max)
}

/// Sum of pixel gradients, with every outermost pixel contributing exactly 1.
pub fn perimeter_gray(m: &GrayImage2D) -> f64 {
    let n = m.n();
    Pixel::all(n).map(|p| if on_outer_ring(p, n) { 1.0 } else { gradient_unchecked(m, p) }).sum()
}

/// Images with a perimeter size.
pub trait Perimeter {
    fn side(&self) -> usize;
    fn perimeter(&self) -> f64;
}

impl Perimeter for BinaryImage2D {
    fn side(&self) -> usize {
        self.n()
    }

    fn perimeter(&self) -> f64 {
        perimeter_binary_2d(self) as f64
    }
}

impl Perimeter for GrayImage2D {
    fn side(&self) -> usize {
        self.n()
    }

    fn perimeter(&self) -> f64 {
        perimeter_gray(self)
    }
}

/// Smoothness criterion: perimeter at most `c · n`.
pub fn is_smooth<M: Perimeter + ?Sized>(m: &M, c: f64) -> bool {
    m.perimeter() <= c * m.side() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn checkerboard(n: usize) -> BinaryImage2D {
        BinaryImage2D::from_fn(n, |p| (p.i + p.j) % 2 == 0).unwrap()
    }

    #[test]
    fn constant_image_has_only_outer_ring() {
        assert_eq!(perimeter_binary_2d(&BinaryImage2D::zeros(4).unwrap()), 12);
    }

    #[test]
    fn single_center_pixel() {
        let m = BinaryImage2D::from_fn(5, |p| p == Pixel::new(3, 3)).unwrap();
        assert_eq!(perimeter_binary_2d(&m), 25);
    }

    #[test]
    fn checkerboard_is_all_perimeter() {
        for n in [2, 3, 8, 11] {
            assert_eq!(perimeter_binary_2d(&checkerboard(n)), n * n);
        }
    }

    #[test]
    fn perimeter_3d_examples() {
        let ones = BinaryImage3D::new(3, vec![1; 27]).unwrap();
        assert_eq!(perimeter_binary_3d(&ones), 26);

        // The 27 voxels around (2,2,2) are all boundary; 19 of them lie on the
        // 56-voxel shell, so the union has 56 + 8 = 64 voxels.
        let single = BinaryImage3D::from_fn(4, |v| v == Voxel::new(2, 2, 2)).unwrap();
        let by_hand = Voxel::all(4)
            .filter(|v| {
                let shell = [v.i, v.j, v.k].iter().any(|&x| x == 1 || x == 4);
                let near = [v.i, v.j, v.k].iter().all(|&x| x <= 3);
                shell || near
            })
            .count();
        assert_eq!(by_hand, 64);
        assert_eq!(perimeter_binary_3d(&single), 64);

        let checker = BinaryImage3D::from_fn(5, |v| (v.i + v.j + v.k) % 2 == 0).unwrap();
        assert_eq!(perimeter_binary_3d(&checker), 125);
    }

    #[test]
    fn gradient_examples() {
        let flat = GrayImage2D::new(4, vec![0.3; 16]).unwrap();
        assert_eq!(gradient(&flat, Pixel::new(2, 3)).unwrap(), 0.0);

        let corner = GrayImage2D::from_fn(4, |p| if p == Pixel::new(1, 1) { 1.0 } else { 0.0 }).unwrap();
        assert_eq!(gradient(&corner, Pixel::new(2, 2)).unwrap(), 1.0);

        let n = 8;
        let ramp = GrayImage2D::from_fn(n, |p| p.j as f64 / n as f64).unwrap();
        let g = gradient(&ramp, Pixel::new(4, 4)).unwrap();
        assert!((g - 1.0 / n as f64).abs() < 1e-12);

        assert!(gradient(&ramp, Pixel::new(0, 3)).is_err());
        assert!(gradient(&ramp, Pixel::new(3, 9)).is_err());
    }

    #[test]
    fn gray_perimeter_examples() {
        let flat = GrayImage2D::new(6, vec![0.7; 36]).unwrap();
        assert_eq!(perimeter_gray(&flat), 20.0);

        let checker = checkerboard(7);
        assert_eq!(perimeter_gray(&checker.to_gray()), 49.0);

        let ramp = GrayImage2D::from_fn(8, |p| p.j as f64 / 8.0).unwrap();
        assert!((perimeter_gray(&ramp) - 32.5).abs() < 1e-12);
    }

    #[test]
    fn binary_and_gray_perimeters_agree_on_binary_data() {
        let m = BinaryImage2D::from_fn(12, |p| (p.i as f64 - 6.0).hypot(p.j as f64 - 5.0) < 4.0).unwrap();
        assert_eq!(perimeter_gray(&m.to_gray()), perimeter_binary_2d(&m) as f64);
    }

    #[test]
    fn smoothness() {
        let flat = BinaryImage2D::zeros(16).unwrap();
        assert!(is_smooth(&flat, 4.0));
        assert!(!is_smooth(&checkerboard(16), 4.0));
        let n = 16;
        let half = BinaryImage2D::from_fn(n, |p| p.j > n / 2).unwrap();
        assert_eq!(perimeter_binary_2d(&half), 6 * n - 8);
        assert!(is_smooth(&half, 6.0));
    }
}
