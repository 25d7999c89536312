//! Seeded, order-independent randomness.
//!
//! Every random stream is a ChaCha8 generator keyed by a seed derived from a
//! root seed and a stream index, so parallel workers can draw from disjoint
//! streams without sharing state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::image::Raster;

/// SplitMix64 finalizer.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of stream `stream` under `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    mix64(mix64(seed ^ 0x9e37_79b9_7f4a_7c15).wrapping_add(mix64(stream.wrapping_add(0x632b_e59b_d9b4_e019))))
}

pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// An index in `0..cells` drawn uniformly.
#[inline]
pub fn sample_index<G: Rng>(cells: usize, rng: &mut G) -> usize {
    rng.random_range(0..cells)
}

/// A cell drawn uniformly with replacement.
#[inline]
pub fn sample_coord<R: Raster + ?Sized, G: Rng>(image: &R, rng: &mut G) -> R::Coord {
    image.coord_at(sample_index(image.cells(), rng))
}
