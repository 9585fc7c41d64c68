//! Block-position counters that replace per-pixel division in the pipeline.

/// Counter phase at the start of every image row and at reset.
///
/// Construction cells cover `ceil(r/2)` rows/columns at the image origin
/// (round-half-up projection), so the in-block counter starts at
/// `r - ceil(r/2) = floor(r/2)` and the first block ends when it reaches
/// `r - 1`.
#[inline]
pub fn block_phase_init(radius: usize) -> usize {
    radius / 2
}

/// Row/column block counters.
///
/// `cx` is the row phase inside the current construction block row,
/// `py` the construction column (block) index, `cy` the column phase
/// inside that block and `plane` the construction row (plane) index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BlockCounters {
    pub cx: usize,
    pub py: usize,
    pub cy: usize,
    pub plane: usize,
}

impl BlockCounters {
    pub fn new(radius: usize) -> Self {
        let init = block_phase_init(radius);
        Self {
            cx: init,
            py: 0,
            cy: init,
            plane: 0,
        }
    }

    /// Step past column `y` of a row of `width` pixels.
    pub fn advance(&mut self, y: usize, width: usize, radius: usize) {
        if y == width - 1 {
            if self.cx == radius - 1 {
                self.cx = 0;
                self.plane += 1;
            } else {
                self.cx += 1;
            }
            self.py = 0;
            self.cy = block_phase_init(radius);
        } else if self.cy == radius - 1 {
            self.py += 1;
            self.cy = 0;
        } else {
            self.cy += 1;
        }
    }

    /// First row of a construction block (or of the image).
    #[inline]
    pub fn block_top(&self, x: usize) -> bool {
        self.cx == 0 || x == 0
    }

    #[inline]
    pub fn block_bottom(&self, x: usize, height: usize, radius: usize) -> bool {
        self.cx == radius - 1 || x == height - 1
    }

    #[inline]
    pub fn block_left(&self, y: usize) -> bool {
        self.cy == 0 || y == 0
    }

    #[inline]
    pub fn block_right(&self, y: usize, width: usize, radius: usize) -> bool {
        self.cy == radius - 1 || y == width - 1
    }
}

/// Functional form of [`BlockCounters::advance`].
pub fn advance_counters(
    state: BlockCounters,
    y: usize,
    width: usize,
    radius: usize,
) -> BlockCounters {
    let mut next = state;
    next.advance(y, width, radius);
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::axis_cell;

    #[test]
    fn initial_state() {
        let c = BlockCounters::new(3);
        assert_eq!((c.cx, c.py, c.cy), (1, 0, 1));
        let c = BlockCounters::new(1);
        assert_eq!((c.cx, c.py, c.cy), (0, 0, 0));
    }

    #[test]
    fn mid_row_wrap() {
        let c = BlockCounters {
            cx: 1,
            py: 4,
            cy: 2,
            plane: 0,
        };
        let n = advance_counters(c, 10, 40, 3);
        assert_eq!((n.py, n.cy), (5, 0));
        let n = advance_counters(n, 11, 40, 3);
        assert_eq!((n.py, n.cy), (5, 1));
    }

    #[test]
    fn row_end() {
        let c = BlockCounters {
            cx: 2,
            py: 9,
            cy: 1,
            plane: 3,
        };
        let n = advance_counters(c, 39, 40, 3);
        assert_eq!((n.cx, n.py, n.cy, n.plane), (0, 0, 1, 4));
        let n = advance_counters(n, 39, 40, 3);
        assert_eq!((n.cx, n.py, n.cy, n.plane), (1, 0, 1, 4));
    }

    #[test]
    fn counters_track_projection() {
        for r in 1..=9 {
            for (w, h) in [(2 * r + 3, 3 * r + 1), (5 * r, 2 * r), (17, 23)] {
                let mut c = BlockCounters::new(r);
                for x in 0..h {
                    for y in 0..w {
                        assert_eq!(c.plane, axis_cell(x, r), "r={r} x={x}");
                        assert_eq!(c.py, axis_cell(y, r), "r={r} y={y}");
                        let top = x == 0 || axis_cell(x - 1, r) != axis_cell(x, r);
                        let bottom = x == h - 1 || axis_cell(x + 1, r) != axis_cell(x, r);
                        let left = y == 0 || axis_cell(y - 1, r) != axis_cell(y, r);
                        let right = y == w - 1 || axis_cell(y + 1, r) != axis_cell(y, r);
                        assert_eq!(c.block_top(x), top);
                        assert_eq!(c.block_bottom(x, h, r), bottom);
                        assert_eq!(c.block_left(y), left);
                        assert_eq!(c.block_right(y, w, r), right);
                        assert!(c.cx < r && c.cy < r);
                        c.advance(y, w, r);
                    }
                }
            }
        }
    }
}
