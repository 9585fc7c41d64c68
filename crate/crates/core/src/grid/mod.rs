//! Three-pass bilateral grid: construct (splat), blur, slice.
//!
//! The grid window on the lattice is always radius 1; the image-space
//! window radius `r` enters through the lattice spacing, so `r` pixels map
//! to one cell along each spatial axis and `r * sigma_r / sigma_s`
//! intensity levels map to one cell along the range axis.

mod blur;
mod construct;
mod slice;

pub use blur::{
    blur_grid, quantize_kernel_pow2, ArithmeticMode, BlurredCell, BlurredGrid, ShiftKernel,
    DEFAULT_BIT_BUDGET, MAX_BIT_BUDGET,
};
pub use construct::{
    axis_cell, axis_floor_frac, cell_bit_widths, construct_grid, feature_vector, grid_dimensions,
    intensity_cell, intensity_floor_frac, FeatureVector, Grid, GridCell, GridDims,
};
pub use slice::{slice, TiPoint, TiWeights};

pub(crate) use blur::{BlurKernel, Neighborhood};
pub(crate) use slice::{coefficients, interpolate, needed_offsets};

use crate::bilateral::DenoiseParams;
use crate::image::Image;

/// Engine configuration beyond the filter parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BgConfig {
    pub mode: ArithmeticMode,
    pub weights: TiWeights,
}

impl Default for BgConfig {
    fn default() -> Self {
        Self {
            mode: ArithmeticMode::Float,
            weights: TiWeights::Standard,
        }
    }
}

impl BgConfig {
    pub fn new(mode: ArithmeticMode, weights: TiWeights) -> Self {
        Self { mode, weights }
    }
}

/// Denoise with the three-pass grid.
pub fn bg_denoise(image: &Image, params: &DenoiseParams, config: &BgConfig) -> Image {
    let grid = construct_grid(image, params);
    let blurred = blur_grid(&grid, params, &config.mode);
    slice(image, &blurred, params, config.weights)
}
