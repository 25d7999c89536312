//! Fixed benchmark instances, shared by the criterion benches.

use subpix_core::adversarial::{gen_d2, AdversarialParams};
use subpix_core::cover::{Cover2D, CoverParams, Family2D};
use subpix_core::{rng, synth, AffineMap2D, BinaryImage2D, GrayImage2D};

/// A smooth image and a copy shifted by `(n/16, −n/32)`.
pub fn smooth_pair(n: usize, seed: u64) -> (BinaryImage2D, BinaryImage2D) {
    let mut g = rng::stream(rng::derive_seed(seed, n as u64));
    let m1 = synth::random_smooth_binary(&mut g, n, 6.0);
    let m2 = synth::shifted_binary(&m1, (n / 16) as i64, -((n / 32) as i64), 0);
    (m1, m2)
}

/// A planted-shift pair with unit blocks.
pub fn adversarial_pair(n: usize, seed: u64) -> (BinaryImage2D, BinaryImage2D) {
    let (m1, m2, _) = gen_d2(&AdversarialParams::new(n, 1, seed).unwrap()).unwrap();
    (m1, m2)
}

/// A smooth grayscale image and its copy under contrast 2, brightness −0.5.
pub fn gray_pair(n: usize, seed: u64) -> (GrayImage2D, GrayImage2D) {
    let mut g = rng::stream(rng::derive_seed(seed, n as u64));
    let m1 = synth::random_smooth_gray(&mut g, n, 0.25, 0.75);
    let m2 = m1.map_values(|v| 2.0 * v - 0.5).unwrap();
    (m1, m2)
}

pub fn translation_cover(n: usize, delta_prime: f64) -> Cover2D {
    Cover2D::build_family(CoverParams::new(n, delta_prime, 2.0).unwrap(), Family2D::Translation).unwrap()
}

pub fn candidates(cover: &Cover2D) -> Vec<AffineMap2D> {
    cover.members().collect()
}
