//! MSSIM (uniform square window, valid positions only) and PSNR.

use crate::error::ParamError;
use crate::image::Image;

/// SSIM constants and window side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MssimConfig {
    pub c1: f64,
    pub c2: f64,
    pub window: usize,
}

impl Default for MssimConfig {
    fn default() -> Self {
        Self {
            c1: (0.01f64 * 255.0).powi(2),
            c2: (0.03f64 * 255.0).powi(2),
            window: 7,
        }
    }
}

/// Summed-area table with one row/column of zero padding.
struct Integral {
    stride: usize,
    data: Vec<i64>,
}

impl Integral {
    fn build(width: usize, height: usize, value: impl Fn(usize, usize) -> i64) -> Self {
        let stride = width + 1;
        let mut data = vec![0i64; stride * (height + 1)];
        for y in 0..height {
            let mut run = 0i64;
            for x in 0..width {
                run += value(y, x);
                data[(y + 1) * stride + x + 1] = data[y * stride + x + 1] + run;
            }
        }
        Self { stride, data }
    }

    #[inline]
    fn window(&self, y: usize, x: usize, side: usize) -> i64 {
        let s = self.stride;
        self.data[(y + side) * s + x + side]
            - self.data[y * s + x + side]
            - self.data[(y + side) * s + x]
            + self.data[y * s + x]
    }
}

/// Mean SSIM over all fully interior windows.
///
/// Window statistics are computed exactly in integers before conversion,
/// so the result is independent of summation order and symmetric in its
/// arguments.
pub fn mssim(a: &Image, b: &Image, config: &MssimConfig) -> Result<f64, ParamError> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(ParamError::new(
            "images",
            format!(
                "dimension mismatch {}x{} vs {}x{}",
                a.width(),
                a.height(),
                b.width(),
                b.height()
            ),
        ));
    }
    if config.window == 0 || config.window % 2 == 0 {
        return Err(ParamError::new("window", "side must be odd"));
    }
    if !(config.c1 > 0.0 && config.c2 > 0.0) {
        return Err(ParamError::new("c1/c2", "must be > 0"));
    }
    let side = config.window;
    let (w, h) = (a.width(), a.height());
    if w < side || h < side {
        return Err(ParamError::new(
            "images",
            format!("{w}x{h} is smaller than the {side}x{side} window"),
        ));
    }

    let pa = |y: usize, x: usize| a.get(y, x) as i64;
    let pb = |y: usize, x: usize| b.get(y, x) as i64;
    let sa = Integral::build(w, h, pa);
    let sb = Integral::build(w, h, pb);
    let saa = Integral::build(w, h, |y, x| pa(y, x) * pa(y, x));
    let sbb = Integral::build(w, h, |y, x| pb(y, x) * pb(y, x));
    let sab = Integral::build(w, h, |y, x| pa(y, x) * pb(y, x));

    let n = (side * side) as i64;
    let nf = n as f64;
    let n2 = nf * nf;
    let mut total = 0.0f64;
    let mut windows = 0usize;
    for y in 0..=h - side {
        for x in 0..=w - side {
            let (ta, tb) = (sa.window(y, x, side), sb.window(y, x, side));
            let mu_a = ta as f64 / nf;
            let mu_b = tb as f64 / nf;
            let var_a = (n * saa.window(y, x, side) - ta * ta) as f64 / n2;
            let var_b = (n * sbb.window(y, x, side) - tb * tb) as f64 / n2;
            let cov = (n * sab.window(y, x, side) - ta * tb) as f64 / n2;
            let num = (2.0 * mu_a * mu_b + config.c1) * (2.0 * cov + config.c2);
            let den = (mu_a * mu_a + mu_b * mu_b + config.c1) * (var_a + var_b + config.c2);
            total += num / den;
            windows += 1;
        }
    }
    Ok(total / windows as f64)
}

/// Peak signal-to-noise ratio in dB; identical images give `+inf`.
pub fn psnr(a: &Image, b: &Image) -> Result<f64, ParamError> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(ParamError::new("images", "dimension mismatch"));
    }
    let se: u64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&x, &y)| {
            let d = x as i64 - y as i64;
            (d * d) as u64
        })
        .sum();
    if se == 0 {
        return Ok(f64::INFINITY);
    }
    let mse = se as f64 / a.pixels().len() as f64;
    Ok(10.0 * (255.0f64 * 255.0 / mse).log10())
}
