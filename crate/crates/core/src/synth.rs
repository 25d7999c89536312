//! Synthetic smooth images for tests, benchmarks and the CLI.

use std::f64::consts::TAU;

use rand::Rng;

use crate::image::{perimeter_binary_2d, BinaryImage2D, BinaryImage3D, GrayImage2D, Pixel};

fn centre(n: usize) -> f64 {
    (n + 1) as f64 / 2.0
}

/// Pixels within `r` of `(ci, cj)` are 1.
pub fn disk(n: usize, ci: f64, cj: f64, r: f64) -> BinaryImage2D {
    BinaryImage2D::from_fn(n, |p| {
        let (di, dj) = (p.i as f64 - ci, p.j as f64 - cj);
        di * di + dj * dj <= r * r
    })
    .expect("n ≥ 2")
}

/// Pixels on the side of the line through the image centre offset by
/// `offset` along direction `angle` are 1.
pub fn half_plane(n: usize, angle: f64, offset: f64) -> BinaryImage2D {
    let (s, c) = angle.sin_cos();
    let m = centre(n);
    BinaryImage2D::from_fn(n, |p| c * (p.i as f64 - m) + s * (p.j as f64 - m) >= offset).expect("n ≥ 2")
}

/// A random disk or half-plane whose perimeter is at most `factor · n`.
///
/// Requires `n ≥ 16` so that such images exist for `factor ≥ 5`.
pub fn random_smooth_binary<G: Rng>(g: &mut G, n: usize, factor: f64) -> BinaryImage2D {
    let nf = n as f64;
    loop {
        let m = if g.random_bool(0.5) {
            let ci = g.random_range(nf / 4.0..=3.0 * nf / 4.0);
            let cj = g.random_range(nf / 4.0..=3.0 * nf / 4.0);
            disk(n, ci, cj, g.random_range(nf / 10.0..=nf / 7.0))
        } else {
            half_plane(n, g.random_range(0.0..TAU), g.random_range(-nf / 4.0..=nf / 4.0))
        };
        if perimeter_binary_2d(&m) as f64 <= factor * nf {
            return m;
        }
    }
}

/// `M(i, j) = j / n`.
pub fn ramp(n: usize) -> GrayImage2D {
    GrayImage2D::from_fn(n, |p| p.j as f64 / n as f64).expect("values in [0, 1]")
}

/// A linear ramp in a random direction plus a brighter disk, with values in
/// `[lo, hi]`.
pub fn random_smooth_gray<G: Rng>(g: &mut G, n: usize, lo: f64, hi: f64) -> GrayImage2D {
    let nf = n as f64;
    let (s, c) = g.random_range(0.0..TAU).sin_cos();
    let (ci, cj) = (g.random_range(nf / 4.0..=3.0 * nf / 4.0), g.random_range(nf / 4.0..=3.0 * nf / 4.0));
    let r = g.random_range(nf / 10.0..=nf / 6.0);
    let m = centre(n);
    GrayImage2D::from_fn(n, |p| {
        let (x, y) = (p.i as f64, p.j as f64);
        // Projection onto the direction lies in [-n/√2, n/√2].
        let t = 0.5 + (c * (x - m) + s * (y - m)) / (2.0 * std::f64::consts::SQRT_2 * nf);
        let inside = (x - ci).powi(2) + (y - cj).powi(2) <= r * r;
        let u = 0.6 * t + if inside { 0.4 } else { 0.0 };
        lo + (hi - lo) * u.clamp(0.0, 1.0)
    })
    .expect("values in [lo, hi] ⊆ [0, 1]")
}

/// Voxels within `r` of `c` are 1.
pub fn ball(n: usize, c: [f64; 3], r: f64) -> BinaryImage3D {
    BinaryImage3D::from_fn(n, |v| {
        let d = [v.i as f64 - c[0], v.j as f64 - c[1], v.k as f64 - c[2]];
        d.iter().map(|x| x * x).sum::<f64>() <= r * r
    })
    .expect("n ≥ 1")
}

/// The image `M₂` with `M₂(p + d) = M₁(p)`; uncovered pixels are `fill`.
pub fn shifted_binary(m: &BinaryImage2D, di: i64, dj: i64, fill: u8) -> BinaryImage2D {
    let n = m.n() as i64;
    BinaryImage2D::from_fn(m.n(), |q| {
        let (i, j) = (q.i as i64 - di, q.j as i64 - dj);
        if (1..=n).contains(&i) && (1..=n).contains(&j) {
            m.get(Pixel::new(i as usize, j as usize)) == 1
        } else {
            fill == 1
        }
    })
    .expect("same side")
}

/// Grayscale analogue of [`shifted_binary`].
pub fn shifted_gray(m: &GrayImage2D, di: i64, dj: i64, fill: f64) -> GrayImage2D {
    let n = m.n() as i64;
    GrayImage2D::from_fn(m.n(), |q| {
        let (i, j) = (q.i as i64 - di, q.j as i64 - dj);
        if (1..=n).contains(&i) && (1..=n).contains(&j) {
            m.get(Pixel::new(i as usize, j as usize))
        } else {
            fill
        }
    })
    .expect("same side")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn smooth_generators_respect_the_perimeter_bound() {
        let mut g = rng::stream(1);
        for n in [16, 32, 64] {
            for _ in 0..20 {
                let m = random_smooth_binary(&mut g, n, 6.0);
                assert!(perimeter_binary_2d(&m) <= 6 * n);
                assert!(m.count_ones() > 0 || n < 16);
            }
        }
    }

    #[test]
    fn smooth_gray_stays_in_range() {
        let mut g = rng::stream(2);
        let m = random_smooth_gray(&mut g, 32, 0.25, 0.75);
        assert!(m.as_slice().iter().all(|&v| (0.25..=0.75).contains(&v)));
    }

    #[test]
    fn shift_moves_content() {
        let m = disk(16, 8.0, 8.0, 3.0);
        let s = shifted_binary(&m, 2, -1, 0);
        assert_eq!(s.get(Pixel::new(10, 7)), 1);
        assert_eq!(s.count_ones(), m.count_ones());
    }

    #[test]
    fn ball_is_symmetric() {
        let b = ball(9, [5.0; 3], 2.0);
        assert_eq!(b.count_ones(), 33);
    }
}
