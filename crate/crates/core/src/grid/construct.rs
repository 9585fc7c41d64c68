use crate::bilateral::DenoiseParams;
use crate::image::Image;
use crate::round_half_up;

/// One lattice point of the grid: how many pixels landed here and the sum
/// of their intensities.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct GridCell {
    pub count: u32,
    pub sum: u32,
}

impl GridCell {
    pub const EMPTY: GridCell = GridCell { count: 0, sum: 0 };

    #[inline]
    pub fn add_pixel(&mut self, intensity: u8) {
        self.count += 1;
        self.sum += intensity as u32;
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.count == 0
    }
}

/// Lattice extents `(gx, gy, gz)` along rows, columns and intensity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridDims {
    pub gx: usize,
    pub gy: usize,
    pub gz: usize,
}

impl GridDims {
    #[inline]
    pub fn len(&self) -> usize {
        self.gx * self.gy * self.gz
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        (x * self.gy + y) * self.gz + z
    }
}

/// `(floor(h/r)+2, floor(w/r)+2, floor(255/(r*sigma_r/sigma_s))+2)`.
pub fn grid_dimensions(params: &DenoiseParams, width: usize, height: usize) -> GridDims {
    let r = params.radius();
    GridDims {
        gx: height / r + 2,
        gy: width / r + 2,
        gz: (255.0 / params.intensity_step()).floor() as usize + 2,
    }
}

/// Continuous grid coordinates of a pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector {
    pub px: f64,
    pub py: f64,
    pub pz: f64,
}

pub fn feature_vector(
    row: usize,
    col: usize,
    intensity: u8,
    params: &DenoiseParams,
) -> FeatureVector {
    let r = params.radius() as f64;
    FeatureVector {
        px: row as f64 / r,
        py: col as f64 / r,
        pz: intensity as f64 / params.intensity_step(),
    }
}

/// `round_half_up(index / r)` computed exactly in integers.
#[inline]
pub fn axis_cell(index: usize, radius: usize) -> usize {
    (2 * index + radius) / (2 * radius)
}

/// Integer cell below `index / r` and the exact fractional offset.
#[inline]
pub fn axis_floor_frac(index: usize, radius: usize) -> (usize, f64) {
    (index / radius, (index % radius) as f64 / radius as f64)
}

/// Intensity cell a pixel is projected to during construction.
#[inline]
pub fn intensity_cell(intensity: u8, params: &DenoiseParams) -> usize {
    round_half_up(intensity as f64 / params.intensity_step()) as usize
}

/// Intensity cell below the pixel's continuous coordinate and its fraction.
#[inline]
pub fn intensity_floor_frac(intensity: u8, params: &DenoiseParams) -> (usize, f64) {
    let p = intensity as f64 / params.intensity_step();
    let f = p.floor();
    (f as usize, p - f)
}

/// Bits needed to hold a cell's count and sum when `r x r` pixels can share
/// one cell: `ceil(log2(r^2+1))` and `ceil(log2(255 r^2 + 1))`.
pub fn cell_bit_widths(radius: usize) -> (u32, u32) {
    let bits = |n: u64| 64 - n.leading_zeros();
    let rr = (radius * radius) as u64;
    (bits(rr), bits(255 * rr))
}

/// Accumulator grid produced by splatting an image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    dims: GridDims,
    cells: Vec<GridCell>,
}

impl Grid {
    pub fn zeroed(dims: GridDims) -> Self {
        Self {
            dims,
            cells: vec![GridCell::EMPTY; dims.len()],
        }
    }

    #[inline]
    pub fn dims(&self) -> GridDims {
        self.dims
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> GridCell {
        self.cells[self.dims.index(x, y, z)]
    }

    #[inline]
    pub fn get_mut(&mut self, x: usize, y: usize, z: usize) -> &mut GridCell {
        let i = self.dims.index(x, y, z);
        &mut self.cells[i]
    }

    /// Cell lookup that yields an empty cell outside the lattice.
    #[inline]
    pub fn get_padded(&self, x: isize, y: isize, z: isize) -> GridCell {
        let d = self.dims;
        if x < 0 || y < 0 || z < 0 || x as usize >= d.gx || y as usize >= d.gy || z as usize >= d.gz
        {
            GridCell::EMPTY
        } else {
            self.get(x as usize, y as usize, z as usize)
        }
    }

    pub fn cells(&self) -> &[GridCell] {
        &self.cells
    }

    /// Column of `gz` cells at lattice position `(x, y)`.
    pub fn column(&self, x: usize, y: usize) -> &[GridCell] {
        let start = self.dims.index(x, y, 0);
        &self.cells[start..start + self.dims.gz]
    }

    pub fn total_count(&self) -> u64 {
        self.cells.iter().map(|c| c.count as u64).sum()
    }

    pub fn total_sum(&self) -> u64 {
        self.cells.iter().map(|c| c.sum as u64).sum()
    }
}

/// Splat every pixel into the cell nearest its feature vector.
pub fn construct_grid(image: &Image, params: &DenoiseParams) -> Grid {
    let r = params.radius();
    let mut grid = Grid::zeroed(grid_dimensions(params, image.width(), image.height()));
    let zcell: Vec<usize> = (0..=255u8).map(|l| intensity_cell(l, params)).collect();
    for row in 0..image.height() {
        let x = axis_cell(row, r);
        for (col, &l) in image.row(row).iter().enumerate() {
            grid.get_mut(x, axis_cell(col, r), zcell[l as usize])
                .add_pixel(l);
        }
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(r: usize, s: f64, t: f64) -> DenoiseParams {
        DenoiseParams::new(r, s, t).unwrap()
    }

    #[test]
    fn dimensions() {
        let d = grid_dimensions(&p(7, 4.0, 50.0), 1920, 1080);
        assert_eq!((d.gx, d.gy, d.gz), (156, 276, 4));
        let d = grid_dimensions(&p(1, 3.0, 3.0), 4, 4);
        assert_eq!((d.gx, d.gy, d.gz), (6, 6, 257));
        let d = grid_dimensions(&p(4, 8.0, 70.0), 1920, 1080);
        assert_eq!((d.gx, d.gy, d.gz), (272, 482, 9));
        // huge intensity step collapses to two slabs
        let d = grid_dimensions(&p(2, 0.01, 1000.0), 8, 8);
        assert_eq!(d.gz, 2);
    }

    #[test]
    fn feature_vectors() {
        let fv = feature_vector(0, 0, 0, &p(3, 1.0, 1.0));
        assert_eq!((fv.px, fv.py, fv.pz), (0.0, 0.0, 0.0));
        let fv = feature_vector(7, 14, 175, &p(7, 4.0, 50.0));
        assert_eq!((fv.px, fv.py, fv.pz), (1.0, 2.0, 2.0));
        let fv = feature_vector(3, 5, 128, &p(2, 2.0, 64.0));
        assert_eq!((fv.px, fv.py, fv.pz), (1.5, 2.5, 2.0));
    }

    #[test]
    fn rounding_helpers() {
        assert_eq!(axis_cell(1, 2), 1); // 0.5 rounds up
        assert_eq!(axis_cell(1, 3), 0);
        assert_eq!(axis_cell(2, 3), 1);
        assert_eq!(axis_floor_frac(7, 3), (2, 1.0 / 3.0));
        let q = p(2, 2.0, 50.0);
        assert_eq!(intensity_cell(100, &q), 2);
        assert_eq!(intensity_cell(25, &q), 1);
        assert_eq!(intensity_floor_frac(75, &q), (1, 0.5));
    }

    #[test]
    fn bit_widths() {
        assert_eq!(cell_bit_widths(1), (1, 8));
        assert_eq!(cell_bit_widths(4), (5, 12));
        assert_eq!(cell_bit_widths(15), (8, 16));
    }

    #[test]
    fn one_pixel_grid() {
        let g = construct_grid(&Image::filled(1, 1, 0), &p(1, 2.0, 2.0));
        assert_eq!(g.get(0, 0, 0), GridCell { count: 1, sum: 0 });
        assert_eq!(g.total_count(), 1);
    }

    #[test]
    fn two_by_two_constant() {
        let g = construct_grid(&Image::filled(2, 2, 100), &p(2, 2.0, 50.0));
        // rows/cols 0 -> cell 0, 1 -> cell 1 (0.5 rounds up); z = 100/50 = 2
        for x in 0..2 {
            for y in 0..2 {
                assert_eq!(g.get(x, y, 2), GridCell { count: 1, sum: 100 });
            }
        }
        assert_eq!((g.total_count(), g.total_sum()), (4, 400));
    }
}
