#![allow(dead_code)]

use bgrid::{DenoiseParams, Image};
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

/// Grid-space filter evaluated straight from its definition: every lattice
/// point is the weighted mean of all pixels whose rounded feature vector
/// lies within one cell of it (per-axis weight `exp(-d^2 / (2 sigma_g^2))`),
/// then each pixel interpolates the eight lattice points around its real
/// feature vector. No grid is ever materialized.
pub fn direct_grid_filter(img: &Image, p: &DenoiseParams) -> Image {
    let r = p.radius() as f64;
    let s = p.radius() as f64 * p.sigma_r() / p.sigma_s();
    let sg = p.sigma_s() / r;
    let feat = |row: usize, col: usize, l: u8| [row as f64 / r, col as f64 / r, l as f64 / s];
    let rounded: Vec<([i64; 3], f64)> = (0..img.height())
        .flat_map(|row| (0..img.width()).map(move |col| (row, col)))
        .map(|(row, col)| {
            let l = img.get(row, col);
            let f = feat(row, col, l);
            (f.map(|v| (v + 0.5).floor() as i64), l as f64)
        })
        .collect();
    let lattice = |v: [i64; 3]| -> Option<f64> {
        let (mut num, mut den) = (0.0, 0.0);
        for (c, l) in &rounded {
            let d = [v[0] - c[0], v[1] - c[1], v[2] - c[2]];
            if d.iter().any(|x| x.abs() > 1) {
                continue;
            }
            let g: f64 = d
                .iter()
                .map(|&x| (-((x * x) as f64) / (2.0 * sg * sg)).exp())
                .product();
            num += g * l;
            den += g;
        }
        (den > 0.0).then(|| num / den)
    };
    Image::from_fn(img.width(), img.height(), |row, col| {
        let l = img.get(row, col);
        let f = feat(row, col, l);
        let base = f.map(|v| v.floor());
        let frac = [f[0] - base[0], f[1] - base[1], f[2] - base[2]];
        let (mut acc, mut wsum) = (0.0, 0.0);
        for corner in 0..8 {
            let o = [corner >> 2 & 1, corner >> 1 & 1, corner & 1];
            let wt: f64 = (0..3)
                .map(|a| if o[a] == 1 { frac[a] } else { 1.0 - frac[a] })
                .product();
            if wt == 0.0 {
                continue;
            }
            let v = [0, 1, 2].map(|a| base[a] as i64 + o[a] as i64);
            if let Some(val) = lattice(v) {
                acc += wt * val;
                wsum += wt;
            }
        }
        let value = if wsum > 0.0 {
            acc / wsum
        } else {
            lattice(f.map(|v| (v + 0.5).floor() as i64)).expect("own cell is occupied")
        };
        (value + 0.5).floor().clamp(0.0, 255.0) as u8
    })
}

/// Deterministic stream of test inputs.
pub struct Cases(Xoshiro256PlusPlus);

impl Cases {
    pub fn new(seed: u64) -> Self {
        Self(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    /// Uniform integer in `lo..=hi`.
    pub fn int(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.0.next_u64() % (hi - lo + 1) as u64) as usize
    }

    pub fn real(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn pick<T: Copy>(&mut self, items: &[T]) -> T {
        items[self.int(0, items.len() - 1)]
    }

    /// Noisy piecewise-smooth content or raw uniform noise.
    pub fn image(&mut self, w: usize, h: usize) -> Image {
        match self.int(0, 2) {
            0 => Image::from_fn(w, h, |_, _| (self.0.next_u64() & 0xff) as u8),
            _ => {
                let sigma = self.real(0.0, 40.0);
                bgrid::add_gaussian_noise(
                    &bgrid::image::synthetic_scene(w, h),
                    sigma,
                    self.0.next_u64(),
                )
                .unwrap()
            }
        }
    }
}
