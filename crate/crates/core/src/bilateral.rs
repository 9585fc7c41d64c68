//! Brute-force bilateral filter and the parameter set shared by every engine.
//!
//! The filter clips its window at image borders and renormalizes over the
//! in-bounds taps, so every output is a convex combination of inputs.

use rayon::prelude::*;

use crate::error::ParamError;
use crate::image::Image;
use crate::round_half_up;

/// Window radius and Gaussian widths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenoiseParams {
    radius: usize,
    sigma_s: f64,
    sigma_r: f64,
}

/// Largest accepted radius; keeps per-cell intensity sums within 32 bits.
pub const MAX_RADIUS: usize = 4096;

impl DenoiseParams {
    pub fn new(radius: usize, sigma_s: f64, sigma_r: f64) -> Result<Self, ParamError> {
        if radius < 1 {
            return Err(ParamError::new("radius", "must be at least 1"));
        }
        if radius > MAX_RADIUS {
            return Err(ParamError::new(
                "radius",
                format!("must be at most {MAX_RADIUS}"),
            ));
        }
        if !(sigma_s > 0.0) || !sigma_s.is_finite() {
            return Err(ParamError::new("sigma_s", "must be finite and > 0"));
        }
        if !(sigma_r > 0.0) || !sigma_r.is_finite() {
            return Err(ParamError::new("sigma_r", "must be finite and > 0"));
        }
        Ok(Self {
            radius,
            sigma_s,
            sigma_r,
        })
    }

    #[inline]
    pub fn radius(&self) -> usize {
        self.radius
    }

    #[inline]
    pub fn sigma_s(&self) -> f64 {
        self.sigma_s
    }

    #[inline]
    pub fn sigma_r(&self) -> f64 {
        self.sigma_r
    }

    /// Grid-space standard deviation, `sigma_s / r`.
    #[inline]
    pub fn sigma_g(&self) -> f64 {
        self.sigma_s / self.radius as f64
    }

    /// Intensity extent of one grid cell, `r * sigma_r / sigma_s`.
    #[inline]
    pub fn intensity_step(&self) -> f64 {
        self.radius as f64 * self.sigma_r / self.sigma_s
    }
}

/// Unnormalized Gaussian `exp(-d2 / (2 sigma^2))` of a squared distance.
#[inline]
pub fn gaussian_weight(d2: f64, sigma: f64) -> f64 {
    (-d2 / (2.0 * sigma * sigma)).exp()
}

/// Running weighted sum: `numerator / denominator` is the weighted mean.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WeightedAccumulator {
    pub numerator: f64,
    pub denominator: f64,
}

impl WeightedAccumulator {
    #[inline]
    pub fn add(&mut self, weight: f64, value: f64) {
        self.numerator += weight * value;
        self.denominator += weight;
    }

    pub fn mean(&self) -> Option<f64> {
        (self.denominator > 0.0).then(|| self.numerator / self.denominator)
    }
}

/// Exact bilateral filter over the `(2r+1)^2` window.
pub fn bilateral_filter(image: &Image, params: &DenoiseParams) -> Image {
    let r = params.radius() as isize;
    let (w, h) = (image.width() as isize, image.height() as isize);

    let side = (2 * r + 1) as usize;
    let spatial: Vec<f64> = (-r..=r)
        .flat_map(|dy| (-r..=r).map(move |dx| (dx, dy)))
        .map(|(dx, dy)| gaussian_weight((dx * dx + dy * dy) as f64, params.sigma_s()))
        .collect();
    let range: Vec<f64> = (0..256)
        .map(|d| gaussian_weight((d * d) as f64, params.sigma_r()))
        .collect();

    let mut out = vec![0u8; image.pixels().len()];
    out.par_chunks_mut(image.width())
        .enumerate()
        .for_each(|(row, out_row)| {
            let row = row as isize;
            for (col, dst) in out_row.iter_mut().enumerate() {
                let col = col as isize;
                let center = image.get(row as usize, col as usize) as i32;
                let mut acc = WeightedAccumulator::default();
                for dy in -r..=r {
                    let y = row + dy;
                    if y < 0 || y >= h {
                        continue;
                    }
                    let src = image.row(y as usize);
                    let krow = &spatial[(dy + r) as usize * side..][..side];
                    for dx in -r..=r {
                        let x = col + dx;
                        if x < 0 || x >= w {
                            continue;
                        }
                        let v = src[x as usize] as i32;
                        let weight =
                            krow[(dx + r) as usize] * range[(center - v).unsigned_abs() as usize];
                        acc.add(weight, v as f64);
                    }
                }
                // center tap always contributes weight 1
                let mean = acc.mean().expect("center tap has positive weight");
                *dst = round_half_up(mean).clamp(0.0, 255.0) as u8;
            }
        });
    Image::new(image.width(), image.height(), out).expect("dimensions unchanged")
}
