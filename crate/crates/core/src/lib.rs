//! Sublinear-query approximate matching of images under affine transformations.
//!
//! The crate is organized around the objects being matched and the machinery
//! that compares them:
//!
//! - [`image`]: binary 2D, grayscale 2D and binary 3D grids, perimeter and
//!   gradient computations, and [`MeteredImage`], a facade that counts every
//!   pixel value lookup.
//! - [`transform`]: real affine maps, their image-affine (floor-rounded)
//!   action on pixels, the rotation-scale-rotation decomposition, intensity
//!   maps, and the l∞ⁿ metric between maps.
//! - [`cover`]: finite δ′n-covers of the transformation families, enumerated
//!   lazily as product grids.
//! - [`matcher`]: exact distances, the sampling estimator with median
//!   amplification, the cover-search matchers for smooth 2D and 3D images, and
//!   the pair-sampling matcher for general images.
//! - [`reduction`]: the level-set encoding of grayscale images as binary
//!   volumes and the grayscale matcher.
//! - [`adversarial`]: the random and planted-shift instance generators.
//! - [`netpbm`]: PBM/PGM and the `VOX3` volume format.
//!
//! Pixel coordinates are 1-based everywhere: pixel `(i, j)` has
//! `i, j ∈ {1, …, n}` and covers the half-open unit square `[i, i+1) × [j, j+1)`.

pub mod adversarial;
pub mod cover;
pub mod error;
pub mod image;
pub mod matcher;
pub mod netpbm;
pub mod reduction;
pub mod rng;
pub mod synth;
pub mod transform;

pub use cover::{Cover2D, Cover3DFull, Cover3DRestricted, CoverParams, Family2D, Family3D, Grid1D};
pub use error::{Error, Result};
pub use image::{BinaryImage2D, BinaryImage3D, GrayImage2D, MeteredImage, Pixel, Raster, Tally, Voxel};
pub use matcher::{MatchResult, SampleBudget};
pub use reduction::GrayMatchResult;
pub use transform::{
    AffineMap2D, AffineMap3D, Decomposition2D, Decomposition3D, IntensityMap, RestrictedMap3D, TransformDescriptor,
};
