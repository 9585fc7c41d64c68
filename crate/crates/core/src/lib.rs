//! Bilateral-grid image denoising with a variable-sized window.
//!
//! Three engines share one parameter set ([`DenoiseParams`]):
//!
//! * [`bilateral::bilateral_filter`]: the exact bilateral filter, used as
//!   the quality oracle;
//! * [`grid::bg_denoise`]: the three-pass bilateral grid (construct, blur,
//!   slice) in floating-point or power-of-two arithmetic;
//! * [`streaming::run_streaming`]: a cycle-level model of a fully
//!   pipelined line-buffer implementation of the same grid, bit-exact with
//!   the three-pass engine, that also reports cycle counts, stalls and
//!   per-partition memory port usage.
//!
//! [`metrics`] provides MSSIM and PSNR.

pub mod bilateral;
pub mod error;
pub mod grid;
pub mod image;
pub mod metrics;
pub mod streaming;

pub use bilateral::{bilateral_filter, DenoiseParams};
pub use error::{ParamError, PgmError, ScheduleError};
pub use grid::{bg_denoise, ArithmeticMode, BgConfig, TiWeights};
pub use image::{add_gaussian_noise, load_pgm, save_pgm, Image};
pub use metrics::{mssim, psnr, MssimConfig};
pub use streaming::{run_streaming, CycleReport};

/// Round half up; on the nonnegative values used throughout this crate it
/// coincides with round-half-away-from-zero.
#[inline]
pub fn round_half_up(v: f64) -> f64 {
    (v + 0.5).floor()
}
