use rayon::prelude::*;

use super::construct::{Grid, GridCell, GridDims};
use crate::bilateral::{gaussian_weight, DenoiseParams};
use crate::error::ParamError;

/// Largest shift budget accepted; keeps the integer accumulators in `u128`.
pub const MAX_BIT_BUDGET: u8 = 32;
pub const DEFAULT_BIT_BUDGET: u8 = 8;

/// Power-of-two approximation of the radius-1 Gaussian taps.
///
/// Each axis holds right-shift amounts for the taps at offsets -1, 0, +1
/// (weight `2^-shift`); `None` marks a tap quantized to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ShiftKernel {
    axes: [[Option<u8>; 3]; 3],
    bit_budget: u8,
}

impl ShiftKernel {
    pub fn new(axes: [[Option<u8>; 3]; 3], bit_budget: u8) -> Result<Self, ParamError> {
        if bit_budget == 0 || bit_budget > MAX_BIT_BUDGET {
            return Err(ParamError::new(
                "bit_budget",
                format!("must be in 1..={MAX_BIT_BUDGET}"),
            ));
        }
        for taps in &axes {
            let center =
                taps[1].ok_or_else(|| ParamError::new("kernel", "center tap cannot be zero"))?;
            for tap in taps {
                match tap {
                    Some(s) if *s > bit_budget => {
                        return Err(ParamError::new("kernel", "shift exceeds bit budget"))
                    }
                    Some(s) if *s < center => {
                        return Err(ParamError::new(
                            "kernel",
                            "neighbor tap heavier than center",
                        ))
                    }
                    _ => {}
                }
            }
        }
        Ok(Self { axes, bit_budget })
    }

    pub fn axes(&self) -> &[[Option<u8>; 3]; 3] {
        &self.axes
    }

    pub fn bit_budget(&self) -> u8 {
        self.bit_budget
    }

    /// Signed exponents (`weight = 2^e`) per axis, `None` for zero taps.
    pub fn exponents(&self) -> [[Option<i32>; 3]; 3] {
        self.axes.map(|taps| taps.map(|t| t.map(|s| -(s as i32))))
    }

    /// Tap weight as a real number.
    pub fn weight(&self, axis: usize, tap: usize) -> f64 {
        self.axes[axis][tap].map_or(0.0, |s| (-(s as f64)).exp2())
    }
}

/// Rounds `g(1) = exp(-1/(2 sigma_g^2))` to the nearest power of two in the
/// log domain; the center tap is `2^0`.
pub fn quantize_kernel_pow2(sigma_g: f64, bit_budget: u8) -> Result<ShiftKernel, ParamError> {
    if !(sigma_g > 0.0) {
        return Err(ParamError::new("sigma_g", "must be > 0"));
    }
    let log2_side = -1.0 / (2.0 * sigma_g * sigma_g * std::f64::consts::LN_2);
    let e = log2_side.round();
    let side = if e < -(bit_budget as f64) {
        None
    } else {
        Some((-e).max(0.0) as u8)
    };
    let taps = [side, Some(0), side];
    ShiftKernel::new([taps; 3], bit_budget)
}

/// Arithmetic used for the grid blur.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArithmeticMode {
    /// Double-precision Gaussian taps.
    Float,
    /// Power-of-two taps; accumulation is exact integer shifting.
    Shift(ShiftKernel),
}

impl ArithmeticMode {
    /// Shift mode with the kernel quantized from the parameters.
    pub fn shift_for(params: &DenoiseParams, bit_budget: u8) -> Result<Self, ParamError> {
        Ok(Self::Shift(quantize_kernel_pow2(
            params.sigma_g(),
            bit_budget,
        )?))
    }
}

/// A blurred lattice value and its normalization weight `k`.
///
/// `value` is `None` exactly when no pixel mass reached this point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BlurredCell {
    pub value: Option<f64>,
    pub k: f64,
}

/// Prepared radius-1 blur kernel, shared by the three-pass and streaming
/// engines so that both evaluate identical arithmetic.
#[derive(Debug, Clone)]
pub(crate) enum BlurKernel {
    Float([[f64; 3]; 3]),
    Shift {
        shifts: [[Option<u8>; 3]; 3],
        total: u32,
    },
}

/// 3x3x3 neighborhood indexed `[dx+1][dy+1][dz+1]`.
pub(crate) type Neighborhood = [[[GridCell; 3]; 3]; 3];

impl BlurKernel {
    pub(crate) fn new(params: &DenoiseParams, mode: &ArithmeticMode) -> Self {
        match mode {
            ArithmeticMode::Float => {
                let side = gaussian_weight(1.0, params.sigma_g());
                Self::Float([[side, 1.0, side]; 3])
            }
            ArithmeticMode::Shift(k) => Self::Shift {
                shifts: *k.axes(),
                total: 3 * k.bit_budget() as u32,
            },
        }
    }

    /// Joint numerator/denominator blur of one lattice point.
    #[inline]
    pub(crate) fn blur_cell(&self, n: &Neighborhood) -> BlurredCell {
        match self {
            Self::Float(w) => {
                let (mut num, mut den) = (0.0f64, 0.0f64);
                for a in 0..3 {
                    for b in 0..3 {
                        let wab = w[0][a] * w[1][b];
                        for c in 0..3 {
                            let cell = n[a][b][c];
                            if cell.count == 0 {
                                continue;
                            }
                            let wt = wab * w[2][c];
                            num += wt * cell.sum as f64;
                            den += wt * cell.count as f64;
                        }
                    }
                }
                BlurredCell {
                    value: (den > 0.0).then(|| num / den),
                    k: den,
                }
            }
            Self::Shift { shifts, total } => {
                let (mut num, mut den) = (0u128, 0u128);
                for a in 0..3 {
                    let Some(sa) = shifts[0][a] else { continue };
                    for b in 0..3 {
                        let Some(sb) = shifts[1][b] else { continue };
                        for c in 0..3 {
                            let Some(sc) = shifts[2][c] else { continue };
                            let cell = n[a][b][c];
                            if cell.count == 0 {
                                continue;
                            }
                            let up = total - (sa as u32 + sb as u32 + sc as u32);
                            num += (cell.sum as u128) << up;
                            den += (cell.count as u128) << up;
                        }
                    }
                }
                BlurredCell {
                    value: (den > 0).then(|| num as f64 / den as f64),
                    k: den as f64 * (-(*total as f64)).exp2(),
                }
            }
        }
    }
}

/// The lattice after blurring.
#[derive(Debug, Clone, PartialEq)]
pub struct BlurredGrid {
    dims: GridDims,
    cells: Vec<BlurredCell>,
}

impl BlurredGrid {
    #[inline]
    pub fn dims(&self) -> GridDims {
        self.dims
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> BlurredCell {
        self.cells[self.dims.index(x, y, z)]
    }

    pub fn cells(&self) -> &[BlurredCell] {
        &self.cells
    }

    pub fn from_cells(dims: GridDims, cells: Vec<BlurredCell>) -> Self {
        assert_eq!(cells.len(), dims.len());
        Self { dims, cells }
    }
}

/// Gathers the zero-padded neighborhood of `(x, y, z)`.
pub(crate) fn gather(grid: &Grid, x: usize, y: usize, z: usize) -> Neighborhood {
    let mut n = [[[GridCell::EMPTY; 3]; 3]; 3];
    for (a, plane) in n.iter_mut().enumerate() {
        for (b, col) in plane.iter_mut().enumerate() {
            for (c, cell) in col.iter_mut().enumerate() {
                *cell = grid.get_padded(
                    x as isize + a as isize - 1,
                    y as isize + b as isize - 1,
                    z as isize + c as isize - 1,
                );
            }
        }
    }
    n
}

/// Radius-1 3D Gaussian blur with out-of-lattice neighbors treated as empty.
pub fn blur_grid(grid: &Grid, params: &DenoiseParams, mode: &ArithmeticMode) -> BlurredGrid {
    let kernel = BlurKernel::new(params, mode);
    let dims = grid.dims();
    let mut cells = vec![BlurredCell::default(); dims.len()];
    cells
        .par_chunks_mut(dims.gy * dims.gz)
        .enumerate()
        .for_each(|(x, plane)| {
            for y in 0..dims.gy {
                for z in 0..dims.gz {
                    plane[y * dims.gz + z] = kernel.blur_cell(&gather(grid, x, y, z));
                }
            }
        });
    BlurredGrid { dims, cells }
}
