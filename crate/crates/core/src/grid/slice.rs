use rayon::prelude::*;

use super::blur::BlurredGrid;
use super::construct::{axis_cell, axis_floor_frac, intensity_cell, intensity_floor_frac};
use crate::bilateral::DenoiseParams;
use crate::image::Image;
use crate::round_half_up;

/// Trilinear coefficient convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum TiWeights {
    /// `c(0) = 1 - frac`, `c(1) = frac`.
    #[default]
    Standard,
    /// `c(i) = |frac - i|`, i.e. `c(0) = frac`, `c(1) = 1 - frac`; a vertex
    /// hit puts all weight on the far corner. Kept for comparison only.
    FarCorner,
}

/// Where a pixel lands in the blurred lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiPoint {
    /// Lower corner `floor(p)`.
    pub base: [usize; 3],
    pub frac: [f64; 3],
    /// Offset (0 or 1) of the construction cell `round(p)` from `base`.
    pub round_offset: [usize; 3],
}

impl TiPoint {
    pub fn for_pixel(row: usize, col: usize, intensity: u8, params: &DenoiseParams) -> Self {
        let r = params.radius();
        let (bx, fx) = axis_floor_frac(row, r);
        let (by, fy) = axis_floor_frac(col, r);
        let (bz, fz) = intensity_floor_frac(intensity, params);
        Self {
            base: [bx, by, bz],
            frac: [fx, fy, fz],
            round_offset: [
                axis_cell(row, r) - bx,
                axis_cell(col, r) - by,
                intensity_cell(intensity, params) - bz,
            ],
        }
    }
}

/// Per-axis coefficients `[c(0), c(1)]`.
#[inline]
pub(crate) fn coefficients(frac: [f64; 3], weights: TiWeights) -> [[f64; 2]; 3] {
    frac.map(|f| match weights {
        TiWeights::Standard => [1.0 - f, f],
        TiWeights::FarCorner => [f, 1.0 - f],
    })
}

/// Corner offsets per axis that [`interpolate`] may read.
#[inline]
pub(crate) fn needed_offsets(coefs: &[[f64; 2]; 3], round_offset: [usize; 3]) -> [[bool; 2]; 3] {
    let mut need = [[false; 2]; 3];
    for axis in 0..3 {
        for o in 0..2 {
            need[axis][o] = coefs[axis][o] != 0.0 || round_offset[axis] == o;
        }
    }
    need
}

/// Eight-corner interpolation.
///
/// `corner(i, j, k)` returns the blurred value at `base + (i, j, k)` or
/// `None` if that lattice point is empty. Corners with a zero coefficient
/// are never read. Empty corners are dropped and the remaining weights
/// renormalized; if every weighted corner is empty, the construction cell
/// (always occupied) is used.
#[inline]
pub(crate) fn interpolate(
    coefs: &[[f64; 2]; 3],
    round_offset: [usize; 3],
    mut corner: impl FnMut(usize, usize, usize) -> Option<f64>,
) -> u8 {
    let (mut acc, mut wsum) = (0.0f64, 0.0f64);
    let mut missing = false;
    for i in 0..2 {
        let ci = coefs[0][i];
        if ci == 0.0 {
            continue;
        }
        for j in 0..2 {
            let cj = coefs[1][j];
            if cj == 0.0 {
                continue;
            }
            let cij = ci * cj;
            for k in 0..2 {
                let ck = coefs[2][k];
                if ck == 0.0 {
                    continue;
                }
                let wt = cij * ck;
                match corner(i, j, k) {
                    Some(v) => {
                        acc += wt * v;
                        wsum += wt;
                    }
                    None => missing = true,
                }
            }
        }
    }
    let value = if wsum == 0.0 {
        let [i, j, k] = round_offset;
        corner(i, j, k).expect("construction cell of a pixel is never empty")
    } else if missing {
        acc / wsum
    } else {
        acc
    };
    round_half_up(value).clamp(0.0, 255.0) as u8
}

/// Reads the blurred lattice back at every pixel's feature coordinates.
pub fn slice(
    image: &Image,
    blurred: &BlurredGrid,
    params: &DenoiseParams,
    weights: TiWeights,
) -> Image {
    let w = image.width();
    let mut out = vec![0u8; image.pixels().len()];
    out.par_chunks_mut(w).enumerate().for_each(|(row, dst)| {
        for (col, px) in dst.iter_mut().enumerate() {
            let pt = TiPoint::for_pixel(row, col, image.get(row, col), params);
            let coefs = coefficients(pt.frac, weights);
            let [bx, by, bz] = pt.base;
            *px = interpolate(&coefs, pt.round_offset, |i, j, k| {
                blurred.get(bx + i, by + j, bz + k).value
            });
        }
    });
    Image::new(w, image.height(), out).expect("dimensions unchanged")
}
