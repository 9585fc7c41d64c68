//! 8-bit grayscale images, binary PGM codec and seeded noise injection.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::{SplitMix64, Xoshiro256PlusPlus};

use crate::error::{ParamError, PgmError};
use crate::round_half_up;

/// Row-major 8-bit grayscale raster.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, ParamError> {
        if width == 0 {
            return Err(ParamError::new("width", "must be at least 1"));
        }
        if height == 0 {
            return Err(ParamError::new("height", "must be at least 1"));
        }
        if pixels.len() != width * height {
            return Err(ParamError::new(
                "pixels",
                format!(
                    "length {} does not match {}x{}",
                    pixels.len(),
                    width,
                    height
                ),
            ));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// # Panics
    /// Panics if either dimension is zero.
    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be nonzero");
        Self {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    /// Builds an image by evaluating `f(row, col)` for every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be nonzero");
        let mut pixels = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                pixels.push(f(row, col));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        self.pixels[row * self.width + col] = value;
    }

    pub fn row(&self, row: usize) -> &[u8] {
        &self.pixels[row * self.width..(row + 1) * self.width]
    }

    pub fn min_max(&self) -> (u8, u8) {
        let min = *self.pixels.iter().min().unwrap();
        let max = *self.pixels.iter().max().unwrap();
        (min, max)
    }

    /// Left-right mirror.
    pub fn mirror_horizontal(&self) -> Self {
        Self::from_fn(self.width, self.height, |r, c| {
            self.get(r, self.width - 1 - c)
        })
    }

    pub fn mirror_vertical(&self) -> Self {
        Self::from_fn(self.width, self.height, |r, c| {
            self.get(self.height - 1 - r, c)
        })
    }
}

/// Decodes a binary (`P5`) PGM with maxval 255.
///
/// Header tokens may be separated by any ASCII whitespace and `#` comments
/// run to the end of the line. Exactly one whitespace byte separates the
/// maxval from the raster.
pub fn load_pgm(bytes: &[u8]) -> Result<Image, PgmError> {
    let mut cursor = HeaderCursor { bytes, pos: 0 };

    let magic = cursor.token();
    if magic != Some(b"P5".as_slice()) {
        let found = magic
            .map(|m| String::from_utf8_lossy(m).into_owned())
            .unwrap_or_default();
        return Err(PgmError::BadMagic(found));
    }
    let width = cursor.number("width")?;
    let height = cursor.number("height")?;
    let maxval = cursor.number("maxval")?;
    if width == 0 {
        return Err(PgmError::ZeroDimension { field: "width" });
    }
    if height == 0 {
        return Err(PgmError::ZeroDimension { field: "height" });
    }
    if maxval != 255 {
        return Err(PgmError::UnsupportedMaxval(maxval));
    }
    // single whitespace byte after maxval
    match bytes.get(cursor.pos) {
        Some(b) if b.is_ascii_whitespace() => cursor.pos += 1,
        _ => return Err(PgmError::BadHeaderField { field: "maxval" }),
    }

    let (width, height) = (width as usize, height as usize);
    let expected = width * height;
    let raster = &bytes[cursor.pos..];
    if raster.len() < expected {
        return Err(PgmError::TruncatedRaster {
            expected,
            found: raster.len(),
        });
    }
    Ok(Image {
        width,
        height,
        pixels: raster[..expected].to_vec(),
    })
}

/// Encodes as binary PGM with the header `P5\n<w> <h>\n255\n`.
pub fn save_pgm(image: &Image) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", image.width, image.height);
    let mut out = Vec::with_capacity(header.len() + image.pixels.len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(&image.pixels);
    out
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    fn skip_blank(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Option<&'a [u8]> {
        self.skip_blank();
        let start = self.pos;
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() || b == b'#' {
                break;
            }
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn number(&mut self, field: &'static str) -> Result<u32, PgmError> {
        let tok = self.token().ok_or(PgmError::BadHeaderField { field })?;
        std::str::from_utf8(tok)
            .ok()
            .filter(|s| s.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|s| s.parse().ok())
            .ok_or(PgmError::BadHeaderField { field })
    }
}

/// Deterministic standard-normal source: xoshiro256++ seeded through
/// SplitMix64 (`seed_from_u64`), mapped to normals with the basic
/// Box–Muller transform. Both outputs of each transform are used.
pub struct GaussianSource {
    rng: Xoshiro256PlusPlus,
    spare: Option<f64>,
}

impl GaussianSource {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: Xoshiro256PlusPlus::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform in (0, 1]: the top 53 bits plus one, scaled by 2^-53.
    fn uniform_open0(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_standard(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform_open0();
        let u2 = self.uniform_open0();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }
}

/// Adds i.i.d. zero-mean Gaussian noise of standard deviation `sigma`,
/// rounding half away from zero and clamping to `[0, 255]`.
pub fn add_gaussian_noise(image: &Image, sigma: f64, seed: u64) -> Result<Image, ParamError> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(ParamError::new("sigma", "must be a finite value >= 0"));
    }
    let mut source = GaussianSource::new(seed);
    let pixels = image
        .pixels
        .iter()
        .map(|&p| {
            let noisy = p as f64 + sigma * source.next_standard();
            noisy.round().clamp(0.0, 255.0) as u8
        })
        .collect();
    Ok(Image {
        width: image.width,
        height: image.height,
        pixels,
    })
}

/// Deterministic piecewise-smooth scene used for quality evaluation when no
/// photograph is supplied: shaded background, flat and shaded discs, bars
/// and a soft ramp, so both flat regions and hard edges are present.
pub fn synthetic_scene(width: usize, height: usize) -> Image {
    let (w, h) = (width as f64, height as f64);
    let scale = w.min(h);
    Image::from_fn(width, height, |row, col| {
        let (x, y) = (col as f64, row as f64);
        let mut v = 60.0 + 50.0 * (x / w) + 25.0 * (y / h);
        v += 10.0
            * ((x / w) * std::f64::consts::PI * 2.0).sin()
            * ((y / h) * std::f64::consts::PI).cos();

        let disc = |cx: f64, cy: f64, rad: f64| {
            let dx = x - cx * w;
            let dy = y - cy * h;
            (dx * dx + dy * dy).sqrt() < rad * scale
        };
        if disc(0.3, 0.4, 0.22) {
            v = 200.0 - 40.0 * ((y / h) - 0.2);
        }
        if disc(0.72, 0.62, 0.18) {
            v = 30.0;
        }
        if disc(0.72, 0.62, 0.08) {
            v = 235.0;
        }
        // vertical bars
        if y > 0.75 * h && y < 0.92 * h && x > 0.05 * w && x < 0.45 * w {
            let band = ((x - 0.05 * w) / (0.05 * w)) as i64;
            v = if band % 2 == 0 { 170.0 } else { 90.0 };
        }
        // horizontal ramp
        if y > 0.08 * h && y < 0.2 * h && x > 0.55 * w && x < 0.95 * w {
            v = 20.0 + 215.0 * (x - 0.55 * w) / (0.4 * w);
        }
        round_half_up(v.clamp(0.0, 255.0)) as u8
    })
}

/// [`synthetic_scene`] with multi-octave value-noise texture added, for a
/// closer match to natural-image statistics (octaves of 64, 32, 16 and 8
/// pixels with amplitudes 12, 8, 5 and 3).
pub fn textured_scene(width: usize, height: usize) -> Image {
    const OCTAVES: [(f64, f64); 4] = [(64.0, 12.0), (32.0, 8.0), (16.0, 5.0), (8.0, 3.0)];
    let base = synthetic_scene(width, height);
    let lattice = |octave: u64, i: i64, j: i64| -> f64 {
        let key =
            octave ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ (j as u64).rotate_left(29);
        (SplitMix64::seed_from_u64(key).next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    Image::from_fn(width, height, |row, col| {
        let mut v = base.get(row, col) as f64;
        for (o, &(period, amp)) in OCTAVES.iter().enumerate() {
            let (fy, fx) = (row as f64 / period, col as f64 / period);
            let (i, j) = (fy.floor() as i64, fx.floor() as i64);
            let (ty, tx) = (fy - i as f64, fx - j as f64);
            let (sy, sx) = (ty * ty * (3.0 - 2.0 * ty), tx * tx * (3.0 - 2.0 * tx));
            let o = o as u64 + 1;
            let top = lattice(o, i, j) * (1.0 - sx) + lattice(o, i, j + 1) * sx;
            let bottom = lattice(o, i + 1, j) * (1.0 - sx) + lattice(o, i + 1, j + 1) * sx;
            v += amp * (top * (1.0 - sy) + bottom * sy);
        }
        round_half_up(v.clamp(0.0, 255.0)) as u8
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_pixel() {
        let img = load_pgm(b"P5\n1 1\n255\n\x80").unwrap();
        assert_eq!((img.width(), img.height()), (1, 1));
        assert_eq!(img.pixels(), &[128]);
    }

    #[test]
    fn extremes() {
        let img = load_pgm(b"P5\n2 1\n255\n\x00\xff").unwrap();
        assert_eq!(img.pixels(), &[0, 255]);
    }

    #[test]
    fn comments_and_whitespace() {
        let img = load_pgm(b"P5\n# made by hand\n 2\t1 # trailing\n255\n\x01\x02").unwrap();
        assert_eq!(img.pixels(), &[1, 2]);
    }

    #[test]
    fn rejects_16_bit() {
        let err = load_pgm(b"P5\n2 2\n65535\n\0\0\0\0\0\0\0\0").unwrap_err();
        assert_eq!(err, PgmError::UnsupportedMaxval(65535));
    }

    #[test]
    fn parse_errors_name_the_field() {
        assert!(matches!(
            load_pgm(b"P2\n1 1\n255\n0"),
            Err(PgmError::BadMagic(_))
        ));
        assert_eq!(
            load_pgm(b"P5\n0 1\n255\n"),
            Err(PgmError::ZeroDimension { field: "width" })
        );
        assert_eq!(
            load_pgm(b"P5\n1 0\n255\n"),
            Err(PgmError::ZeroDimension { field: "height" })
        );
        assert_eq!(
            load_pgm(b"P5\nx 1\n255\n"),
            Err(PgmError::BadHeaderField { field: "width" })
        );
        assert_eq!(
            load_pgm(b"P5\n2 2\n255\n\0\0"),
            Err(PgmError::TruncatedRaster {
                expected: 4,
                found: 2
            })
        );
    }

    #[test]
    fn header_is_exact() {
        let img = Image::filled(1, 1, 128);
        assert_eq!(save_pgm(&img), b"P5\n1 1\n255\n\x80".to_vec());
    }

    #[test]
    fn full_hd_round_trip() {
        let mut src = GaussianSource::new(11);
        let img = Image::from_fn(1920, 1080, |_, _| (src.next_standard().abs() * 80.0) as u8);
        let bytes = save_pgm(&img);
        assert_eq!(bytes.len(), "P5\n1920 1080\n255\n".len() + 1920 * 1080);
        assert_eq!(load_pgm(&bytes).unwrap(), img);
    }

    #[test]
    fn zero_sigma_is_identity() {
        let img = synthetic_scene(40, 30);
        assert_eq!(add_gaussian_noise(&img, 0.0, 5).unwrap(), img);
    }

    #[test]
    fn negative_sigma_rejected() {
        let img = Image::filled(2, 2, 0);
        assert_eq!(add_gaussian_noise(&img, -1.0, 0).unwrap_err().name, "sigma");
    }

    #[test]
    fn noise_statistics() {
        let img = Image::filled(256, 256, 128);
        let noisy = add_gaussian_noise(&img, 30.0, 2024).unwrap();
        let n = noisy.pixels().len() as f64;
        let diffs: Vec<f64> = noisy.pixels().iter().map(|&p| p as f64 - 128.0).collect();
        let mean = diffs.iter().sum::<f64>() / n;
        let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1.0);
        let sd = var.sqrt();
        assert!((28.0..=32.0).contains(&sd), "sample sd {sd}");
        assert!(mean.abs() < 0.5);
    }

    #[test]
    fn clamp_on_black() {
        let img = Image::filled(64, 64, 0);
        let noisy = add_gaussian_noise(&img, 30.0, 3).unwrap();
        assert!(noisy.pixels().iter().any(|&p| p == 0));
        assert!(noisy.pixels().iter().any(|&p| p > 0));
    }

    #[test]
    fn noise_is_deterministic() {
        let img = synthetic_scene(50, 20);
        let a = add_gaussian_noise(&img, 30.0, 77).unwrap();
        let b = add_gaussian_noise(&img, 30.0, 77).unwrap();
        let c = add_gaussian_noise(&img, 30.0, 78).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn generator_stream_is_pinned() {
        // Frozen draws, cross-checked against an independent implementation;
        // a change here breaks reproducibility of earlier noised files.
        let mut src = GaussianSource::new(0);
        let first: Vec<f64> = (0..4).map(|_| src.next_standard()).collect();
        let want = [
            -1.107908598633832,
            1.0114416320093487,
            1.426482308129344,
            0.10285171497850072,
        ];
        for (got, want) in first.iter().zip(want) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        let noisy = add_gaussian_noise(&Image::filled(8, 1, 128), 30.0, 42).unwrap();
        assert_eq!(noisy.pixels(), &[120, 145, 126, 123, 111, 117, 80, 90]);
    }
}
